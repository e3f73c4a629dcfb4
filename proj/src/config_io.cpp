#include "coopmanip/config_io.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coopmanip {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& context, const std::string& key) {
    throw InvalidConfig("unknown key '" + key + "' in section '" + context +
                        "'");
}

void check_keys(const json& j, const std::string& context,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw InvalidConfig("section '" + context + "' must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (allowed.find(key) == allowed.end()) bad_key(context, key);
    }
}

double get_num(const json& j, const std::string& context, const char* key,
               double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        throw InvalidConfig("'" + context + "." + key + "' must be a number");
    }
    return j[key].get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> get_vec(const json& j, const std::string& context,
                                    const char* key,
                                    const Eigen::Matrix<double, N, 1>& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j[key];
    if (!v.is_array() || v.size() != N) {
        throw InvalidConfig("'" + context + "." + key + "' must be an array of " +
                            std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) out[i] = v[i].get<double>();
    return out;
}

// Gain entries accept a scalar (s * I), a 6-array (diagonal), or a 36-array
// (full matrix, row major).
Mat6 get_gain(const json& j, const std::string& context, const char* key,
              const Mat6& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j[key];
    if (v.is_number()) return v.get<double>() * Mat6::Identity();
    if (v.is_array() && v.size() == 6) {
        Mat6 m = Mat6::Zero();
        for (int i = 0; i < 6; ++i) m(i, i) = v[i].get<double>();
        return m;
    }
    if (v.is_array() && v.size() == 36) {
        Mat6 m;
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) m(r, c) = v[6 * r + c].get<double>();
        return m;
    }
    throw InvalidConfig("'" + context + "." + key +
                        "' must be a scalar, 6-array, or 36-array");
}

Vec3 get_std3(const json& j, const std::string& context, const char* key) {
    if (!j.contains(key)) return Vec3::Zero();
    const json& v = j[key];
    if (v.is_number()) return Vec3::Constant(v.get<double>());
    if (v.is_array() && v.size() == 3) {
        return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    throw InvalidConfig("'" + context + "." + key +
                        "' must be a scalar or 3-array");
}

KinematicParams params_from_json(const json& j, const std::string& context,
                                 const KinematicParams& fallback) {
    check_keys(j, context, {"rho", "eta"});
    KinematicParams p;
    p.rho = get_vec<3>(j, context, "rho", fallback.rho);
    const Vec4 eta_fallback = fallback.eta.as_vec4();
    const Vec4 e = get_vec<4>(j, context, "eta", eta_fallback);
    const double n = e.norm();
    if (std::abs(n - 1.0) > 1e-6) {
        throw InvalidConfig("'" + context + ".eta' must be a unit quaternion "
                            "[x, y, z, w]");
    }
    p.eta = UnitQuaternion(e.head<3>(), e[3]);
    return p;
}

json params_to_json(const KinematicParams& p) {
    const Vec4 e = p.eta.as_vec4();
    return json{{"rho", {p.rho[0], p.rho[1], p.rho[2]}},
                {"eta", {e[0], e[1], e[2], e[3]}}};
}

ArmParams arm_from_json(const json& j, const std::string& context,
                        const ArmParams& fallback) {
    check_keys(j, context, {"m_base", "m_mod", "g_amp", "quad_coeff", "variant"});
    ArmParams a = fallback;
    a.m_base = get_num(j, context, "m_base", a.m_base);
    a.m_mod = get_num(j, context, "m_mod", a.m_mod);
    a.g_amp = get_num(j, context, "g_amp", a.g_amp);
    a.quad_coeff = get_num(j, context, "quad_coeff", a.quad_coeff);
    a.variant =
        static_cast<unsigned>(get_num(j, context, "variant", a.variant));
    return a;
}

json arm_to_json(const ArmParams& a) {
    return json{{"m_base", a.m_base},
                {"m_mod", a.m_mod},
                {"g_amp", a.g_amp},
                {"quad_coeff", a.quad_coeff},
                {"variant", a.variant}};
}

std::vector<double> mat_to_row_major(const Mat6& m) {
    std::vector<double> out;
    out.reserve(36);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) out.push_back(m(r, c));
    return out;
}

}  // namespace

Scenario default_scenario_full() {
    Scenario s;
    s.sim = default_scenario();
    return s;
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "(top level)",
               {"plant", "theta_true", "theta_guess", "gains", "estimators",
                "trajectory", "noise", "run"});

    Scenario s = default_scenario_full();
    SimConfig& cfg = s.sim;

    if (j.contains("plant")) {
        const json& p = j["plant"];
        check_keys(p, "plant", {"arm1", "arm2", "object", "lambda"});
        if (p.contains("arm1")) {
            s.plant.arm1 = arm_from_json(p["arm1"], "plant.arm1", s.plant.arm1);
        }
        if (p.contains("arm2")) {
            s.plant.arm2 = arm_from_json(p["arm2"], "plant.arm2", s.plant.arm2);
        }
        if (p.contains("object")) {
            const json& o = p["object"];
            check_keys(o, "plant.object", {"mass", "inertia", "g_amp"});
            s.plant.object.mass = get_num(o, "plant.object", "mass", 1.0);
            s.plant.object.inertia = get_num(o, "plant.object", "inertia", 0.5);
            s.plant.object.g_amp = get_num(o, "plant.object", "g_amp", 0.3);
        }
        if (p.contains("lambda")) {
            const json& l = p["lambda"];
            if (l.is_string() && l.get<std::string>() == "identity") {
                cfg.model.lambda = Mat6::Identity();
            } else if (l.is_array() && l.size() == 36) {
                for (int r = 0; r < 6; ++r)
                    for (int c = 0; c < 6; ++c)
                        cfg.model.lambda(r, c) = l[6 * r + c].get<double>();
                if (!Eigen::FullPivLU<Mat6>(cfg.model.lambda).isInvertible()) {
                    throw InvalidConfig("plant.lambda must be invertible");
                }
            } else {
                throw InvalidConfig(
                    "plant.lambda must be \"identity\" or a 36-array");
            }
        }
    }
    cfg.model.arm1 =
        TaskSpaceArm::synthetic(s.plant.arm1.m_base, s.plant.arm1.m_mod,
                                s.plant.arm1.g_amp, s.plant.arm1.quad_coeff,
                                s.plant.arm1.variant);
    cfg.model.arm2 =
        TaskSpaceArm::synthetic(s.plant.arm2.m_base, s.plant.arm2.m_mod,
                                s.plant.arm2.g_amp, s.plant.arm2.quad_coeff,
                                s.plant.arm2.variant);
    cfg.model.object = ObjectModel::synthetic(
        s.plant.object.mass, s.plant.object.inertia, s.plant.object.g_amp);

    if (j.contains("theta_true")) {
        cfg.theta_true =
            params_from_json(j["theta_true"], "theta_true", cfg.theta_true);
    }
    if (j.contains("theta_guess")) {
        cfg.theta_guess =
            params_from_json(j["theta_guess"], "theta_guess", cfg.theta_guess);
    }

    if (j.contains("gains")) {
        const json& g = j["gains"];
        check_keys(g, "gains", {"gp", "gd"});
        cfg.gains = Gains::checked(get_gain(g, "gains", "gp", cfg.gains.gp),
                                   get_gain(g, "gains", "gd", cfg.gains.gd));
    }

    if (j.contains("estimators")) {
        const json& e = j["estimators"];
        check_keys(e, "estimators",
                   {"mu_attitude", "mu_displacement", "p0_scale",
                    "sample_interval", "pe_window", "pe_threshold"});
        EstimatorSettings& es = cfg.estimators;
        es.mu_attitude = get_num(e, "estimators", "mu_attitude", es.mu_attitude);
        es.mu_displacement =
            get_num(e, "estimators", "mu_displacement", es.mu_displacement);
        es.p0_scale = get_num(e, "estimators", "p0_scale", es.p0_scale);
        es.sample_interval =
            get_num(e, "estimators", "sample_interval", es.sample_interval);
        es.pe_window = static_cast<std::size_t>(get_num(
            e, "estimators", "pe_window", static_cast<double>(es.pe_window)));
        es.pe_threshold =
            get_num(e, "estimators", "pe_threshold", es.pe_threshold);
    }

    if (j.contains("trajectory")) {
        const json& t = j["trajectory"];
        check_keys(t, "trajectory",
                   {"kind", "amplitude", "base_frequency",
                    "axis_precession_rate", "duration", "start", "c_v", "c_a"});
        TrajectorySpec& ts = cfg.trajectory;
        if (t.contains("kind")) {
            const std::string kind = t["kind"].get<std::string>();
            if (kind == "rotating-axis-sine") {
                ts.kind = TrajectoryKind::RotatingAxisSine;
            } else if (kind == "fixed-axis-sine") {
                ts.kind = TrajectoryKind::FixedAxisSine;
            } else if (kind == "rest-to-rest") {
                ts.kind = TrajectoryKind::RestToRest;
            } else {
                throw InvalidConfig("trajectory.kind must be one of "
                                    "rotating-axis-sine, fixed-axis-sine, "
                                    "rest-to-rest");
            }
        }
        ts.amplitude = get_vec<6>(t, "trajectory", "amplitude", ts.amplitude);
        ts.base_frequency =
            get_num(t, "trajectory", "base_frequency", ts.base_frequency);
        ts.axis_precession_rate = get_num(t, "trajectory",
                                          "axis_precession_rate",
                                          ts.axis_precession_rate);
        ts.duration = get_num(t, "trajectory", "duration", ts.duration);
        ts.start = get_vec<6>(t, "trajectory", "start", ts.start);
        ts.c_v = get_num(t, "trajectory", "c_v", ts.c_v);
        ts.c_a = get_num(t, "trajectory", "c_a", ts.c_a);
    }

    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, "noise", {"v_std", "w_std", "seed"});
        cfg.noise.v_std = get_std3(n, "noise", "v_std");
        cfg.noise.w_std = get_std3(n, "noise", "w_std");
        if (n.contains("seed")) cfg.noise.seed = n["seed"].get<std::uint64_t>();
    }

    if (j.contains("run")) {
        const json& r = j["run"];
        check_keys(r, "run",
                   {"dt", "adaptation", "start_on_reference", "x0", "xdot0",
                    "alpha", "constants_samples", "constants_radius",
                    "region_position_range", "region_euler_range",
                    "region_velocity_scale", "kappa_override"});
        cfg.dt = get_num(r, "run", "dt", cfg.dt);
        if (r.contains("adaptation")) {
            cfg.adaptation_enabled = r["adaptation"].get<bool>();
        }
        if (r.contains("start_on_reference")) {
            cfg.start_on_reference = r["start_on_reference"].get<bool>();
        }
        cfg.x0 = get_vec<6>(r, "run", "x0", cfg.x0);
        cfg.xdot0 = get_vec<6>(r, "run", "xdot0", cfg.xdot0);
        s.run.alpha = get_num(r, "run", "alpha", s.run.alpha);
        s.run.constants_samples = static_cast<int>(get_num(
            r, "run", "constants_samples", s.run.constants_samples));
        s.run.constants_radius =
            get_num(r, "run", "constants_radius", s.run.constants_radius);
        s.run.region.position_range = get_num(r, "run", "region_position_range",
                                              s.run.region.position_range);
        s.run.region.euler_range =
            get_num(r, "run", "region_euler_range", s.run.region.euler_range);
        s.run.region.velocity_scale = get_num(r, "run", "region_velocity_scale",
                                              s.run.region.velocity_scale);
        if (r.contains("kappa_override")) {
            const json& ko = r["kappa_override"];
            if (!ko.is_array() || ko.size() != 3) {
                throw InvalidConfig(
                    "'run.kappa_override' must be an array of 3 numbers");
            }
            s.run.use_kappa_override = true;
            s.run.kappa_override =
                Kappas{ko[0].get<double>(), ko[1].get<double>(),
                       ko[2].get<double>()};
        }
    }

    cfg.validate();
    return s;
}

std::string scenario_to_json_text(const Scenario& s) {
    const SimConfig& cfg = s.sim;
    json j;
    // The plant is identified by its construction parameters; custom
    // functional plants are a library-level feature and not serializable.
    j["plant"] = {
        {"arm1", arm_to_json(s.plant.arm1)},
        {"arm2", arm_to_json(s.plant.arm2)},
        {"object",
         {{"mass", s.plant.object.mass},
          {"inertia", s.plant.object.inertia},
          {"g_amp", s.plant.object.g_amp}}},
        {"lambda", cfg.model.lambda.isIdentity(0.0)
                       ? json("identity")
                       : json(mat_to_row_major(cfg.model.lambda))},
    };
    j["theta_true"] = params_to_json(cfg.theta_true);
    j["theta_guess"] = params_to_json(cfg.theta_guess);
    j["gains"] = {{"gp", mat_to_row_major(cfg.gains.gp)},
                  {"gd", mat_to_row_major(cfg.gains.gd)}};
    j["estimators"] = {
        {"mu_attitude", cfg.estimators.mu_attitude},
        {"mu_displacement", cfg.estimators.mu_displacement},
        {"p0_scale", cfg.estimators.p0_scale},
        {"sample_interval", cfg.estimators.sample_interval},
        {"pe_window", cfg.estimators.pe_window},
        {"pe_threshold", cfg.estimators.pe_threshold},
    };
    const char* kind = "rotating-axis-sine";
    if (cfg.trajectory.kind == TrajectoryKind::FixedAxisSine) {
        kind = "fixed-axis-sine";
    } else if (cfg.trajectory.kind == TrajectoryKind::RestToRest) {
        kind = "rest-to-rest";
    }
    j["trajectory"] = {
        {"kind", kind},
        {"amplitude", std::vector<double>(cfg.trajectory.amplitude.data(),
                                          cfg.trajectory.amplitude.data() + 6)},
        {"base_frequency", cfg.trajectory.base_frequency},
        {"axis_precession_rate", cfg.trajectory.axis_precession_rate},
        {"duration", cfg.trajectory.duration},
        {"start", std::vector<double>(cfg.trajectory.start.data(),
                                      cfg.trajectory.start.data() + 6)},
        {"c_v", cfg.trajectory.c_v},
        {"c_a", cfg.trajectory.c_a},
    };
    j["noise"] = {
        {"v_std", {cfg.noise.v_std[0], cfg.noise.v_std[1], cfg.noise.v_std[2]}},
        {"w_std", {cfg.noise.w_std[0], cfg.noise.w_std[1], cfg.noise.w_std[2]}},
        {"seed", cfg.noise.seed},
    };
    j["run"] = {
        {"dt", cfg.dt},
        {"adaptation", cfg.adaptation_enabled},
        {"start_on_reference", cfg.start_on_reference},
        {"x0", std::vector<double>(cfg.x0.data(), cfg.x0.data() + 6)},
        {"xdot0", std::vector<double>(cfg.xdot0.data(), cfg.xdot0.data() + 6)},
        {"alpha", s.run.alpha},
        {"constants_samples", s.run.constants_samples},
        {"constants_radius", s.run.constants_radius},
        {"region_position_range", s.run.region.position_range},
        {"region_euler_range", s.run.region.euler_range},
        {"region_velocity_scale", s.run.region.velocity_scale},
    };
    if (s.run.use_kappa_override) {
        j["run"]["kappa_override"] = {s.run.kappa_override.k0,
                                      s.run.kappa_override.k1,
                                      s.run.kappa_override.k2};
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

void save_scenario(const std::string& path, const Scenario& scenario) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << scenario_to_json_text(scenario);
    if (!out) throw Error("write failed: " + path);
}

std::string scenario_digest(const Scenario& scenario) {
    const std::string text = scenario_to_json_text(scenario);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace coopmanip
