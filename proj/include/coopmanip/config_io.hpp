#pragma once

#include <string>

#include "coopmanip/sim.hpp"
#include "coopmanip/stability.hpp"

namespace coopmanip {

/// Analysis knobs that ride along with the simulation config.
struct RunSettings {
    double alpha = 1.0;            // scale between initial and sup parameter error
    int constants_samples = 2000;  // samples for the envelope constants
    double constants_radius = 0.6; // parameter-ball radius for the constants
    SamplingRegion region;
    // When set, the stability analysis uses these growth constants instead
    // of the sampled pipeline (e.g. to study margins for externally derived
    // constants).
    bool use_kappa_override = false;
    Kappas kappa_override;
};

/// Construction parameters of the synthetic plant; kept alongside the built
/// model so a loaded scenario serializes back to the same document.
struct ArmParams {
    double m_base = 2.0;
    double m_mod = 0.3;
    double g_amp = 0.5;
    double quad_coeff = 0.2;
    unsigned variant = 1;
};

struct ObjectParams {
    double mass = 1.0;
    double inertia = 0.5;
    double g_amp = 0.3;
};

struct PlantParams {
    ArmParams arm1{2.0, 0.3, 0.5, 0.2, 1};
    ArmParams arm2{2.2, 0.25, 0.4, 0.15, 2};
    ObjectParams object;
};

struct Scenario {
    SimConfig sim;
    RunSettings run;
    PlantParams plant;
};

// Scenario with every key at its default (the bundled default scenario).
Scenario default_scenario_full();

// JSON round trip. Loading rejects unknown keys anywhere in the document and
// applies defaults for missing ones; all errors surface as InvalidConfig with
// the offending key in the message.
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& scenario);

// FNV-1a 64-bit digest of the canonical serialized scenario; recorded in run
// manifests so outputs can be traced back to an exact configuration.
std::string scenario_digest(const Scenario& scenario);

}  // namespace coopmanip
