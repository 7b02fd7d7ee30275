#pragma once

#include "fscil/core.hpp"
#include "fscil/synth.hpp"

namespace fscil::testing {

/// Small well-formed synthetic protocol: 6 base + 2 sessions x 2-way 3-shot, 8-dim.
inline SynthSpec small_spec(std::uint64_t seed = 7) {
    SynthSpec spec;
    spec.protocol = {10, 6, 2, 2, 3, 8};
    spec.sigma_intra = 0.6;
    spec.target_delta_inter = 2.0;
    spec.test_per_class = 6;
    spec.base_train_per_class = 8;
    spec.center_offset = 5.0;
    spec.seed = seed;
    return spec;
}

inline bool has_violation(const ValidationReport& r, const std::string& kind) {
    for (const auto& v : r.violations)
        if (v.kind == kind) return true;
    return false;
}

}  // namespace fscil::testing
