#pragma once

#include <string>
#include <vector>

#include "coopmanip/sim.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

// Malformed CSV input; carries the 1-based line number of the offense.
struct CsvFormatError : Error {
    CsvFormatError(const std::string& msg, long line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

// Run-log column layout. Fixed schema; values serialized with 17 significant
// digits so write-then-read reproduces doubles bit-exactly.
extern const char* const kRunLogHeader;

void write_run_log(const std::string& path, const SimLog& log);
SimLog read_run_log(const std::string& path);

/// One row of a twist log: simultaneous end-effector twist measurements.
struct TwistLogRecord {
    double t = 0.0;
    Vec3 v1 = Vec3::Zero();
    Vec3 w1 = Vec3::Zero();
    Vec3 v2 = Vec3::Zero();
    Vec3 w2 = Vec3::Zero();
};

extern const char* const kTwistLogHeader;

void write_twist_log(const std::string& path,
                     const std::vector<TwistLogRecord>& records);
std::vector<TwistLogRecord> read_twist_log(const std::string& path);

}  // namespace coopmanip
