#include "coopmanip/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace coopmanip {

const char* const kRunLogHeader =
    "t,x0,x1,x2,x3,x4,x5,xd0,xd1,xd2,xd3,xd4,xd5,e0,e1,e2,e3,e4,e5,"
    "edot0,edot1,edot2,edot3,edot4,edot5,etah0,etah1,etah2,etah3,"
    "rhoh0,rhoh1,rhoh2,theta_err,u1_norm,u2_norm,pe_lambda_min,V,g_norm,"
    "pe_flag,degen_flag";

const char* const kTwistLogHeader =
    "t,v1x,v1y,v1z,w1x,w1y,w1z,v2x,v2y,v2z,w2x,w2y,w2z";

namespace {

constexpr int kRunLogColumns = 40;
constexpr int kTwistLogColumns = 13;

void append_value(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::vector<double> parse_row(const std::string& line, int expected,
                              long line_number) {
    std::vector<double> values;
    values.reserve(expected);
    const char* p = line.c_str();
    for (;;) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p) {
            throw CsvFormatError("unparsable numeric field", line_number);
        }
        values.push_back(v);
        p = end;
        if (*p == '\0') break;
        if (*p != ',') {
            throw CsvFormatError("expected ',' between fields", line_number);
        }
        ++p;
    }
    if (static_cast<int>(values.size()) != expected) {
        throw CsvFormatError("expected " + std::to_string(expected) +
                                 " fields, got " + std::to_string(values.size()),
                             line_number);
    }
    return values;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open for reading: " + path);
    return in;
}

}  // namespace

void write_run_log(const std::string& path, const SimLog& log) {
    std::ofstream out = open_out(path);
    out << kRunLogHeader << '\n';
    std::string row;
    for (const SimRecord& r : log.records) {
        row.clear();
        append_value(row, r.t);
        for (int i = 0; i < 6; ++i) { row += ','; append_value(row, r.x[i]); }
        for (int i = 0; i < 6; ++i) { row += ','; append_value(row, r.x_d[i]); }
        for (int i = 0; i < 6; ++i) { row += ','; append_value(row, r.e[i]); }
        for (int i = 0; i < 6; ++i) { row += ','; append_value(row, r.edot[i]); }
        for (int i = 0; i < 4; ++i) { row += ','; append_value(row, r.eta_hat[i]); }
        for (int i = 0; i < 3; ++i) { row += ','; append_value(row, r.rho_hat[i]); }
        for (double v : {r.theta_err, r.u1_norm, r.u2_norm, r.pe_lambda_min,
                         r.v_lyap, r.g_norm}) {
            row += ',';
            append_value(row, v);
        }
        row += r.pe_ok ? ",1" : ",0";
        row += r.degenerate ? ",1" : ",0";
        out << row << '\n';
    }
    if (!out) throw Error("write failed: " + path);
}

SimLog read_run_log(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long line_number = 1;
    if (!std::getline(in, line) || line != kRunLogHeader) {
        throw CsvFormatError("bad or missing run-log header", 1);
    }
    SimLog log;
    double prev_t = 0.0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<double> v =
            parse_row(line, kRunLogColumns, line_number);
        SimRecord r;
        int k = 0;
        r.t = v[k++];
        for (int i = 0; i < 6; ++i) r.x[i] = v[k++];
        for (int i = 0; i < 6; ++i) r.x_d[i] = v[k++];
        for (int i = 0; i < 6; ++i) r.e[i] = v[k++];
        for (int i = 0; i < 6; ++i) r.edot[i] = v[k++];
        for (int i = 0; i < 4; ++i) r.eta_hat[i] = v[k++];
        for (int i = 0; i < 3; ++i) r.rho_hat[i] = v[k++];
        r.theta_err = v[k++];
        r.u1_norm = v[k++];
        r.u2_norm = v[k++];
        r.pe_lambda_min = v[k++];
        r.v_lyap = v[k++];
        r.g_norm = v[k++];
        r.pe_ok = v[k++] != 0.0;
        r.degenerate = v[k++] != 0.0;
        if (!log.records.empty() && !(r.t > prev_t)) {
            throw CsvFormatError("time stamps must strictly increase",
                                 line_number);
        }
        prev_t = r.t;
        log.records.push_back(r);
    }
    return log;
}

void write_twist_log(const std::string& path,
                     const std::vector<TwistLogRecord>& records) {
    std::ofstream out = open_out(path);
    out << kTwistLogHeader << '\n';
    std::string row;
    for (const TwistLogRecord& r : records) {
        row.clear();
        append_value(row, r.t);
        for (const Vec3* v : {&r.v1, &r.w1, &r.v2, &r.w2}) {
            for (int i = 0; i < 3; ++i) {
                row += ',';
                append_value(row, (*v)[i]);
            }
        }
        out << row << '\n';
    }
    if (!out) throw Error("write failed: " + path);
}

std::vector<TwistLogRecord> read_twist_log(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long line_number = 1;
    if (!std::getline(in, line) || line != kTwistLogHeader) {
        throw CsvFormatError("bad or missing twist-log header", 1);
    }
    std::vector<TwistLogRecord> records;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<double> v =
            parse_row(line, kTwistLogColumns, line_number);
        TwistLogRecord r;
        r.t = v[0];
        for (int i = 0; i < 3; ++i) {
            r.v1[i] = v[1 + i];
            r.w1[i] = v[4 + i];
            r.v2[i] = v[7 + i];
            r.w2[i] = v[10 + i];
        }
        if (!records.empty() && !(r.t > records.back().t)) {
            throw CsvFormatError("time stamps must strictly increase",
                                 line_number);
        }
        records.push_back(r);
    }
    return records;
}

}  // namespace coopmanip
