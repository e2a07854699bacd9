#pragma once

#include <cstdint>
#include <vector>

namespace synet {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m, v;
    int64_t step = 0;

    static AdamState zeros(size_t n) {
        AdamState s;
        s.m.assign(n, 0.0);
        s.v.assign(n, 0.0);
        return s;
    }
};

// Standard bias-corrected adaptive-moment update over an ordered list of
// parameter segments. Gradients must mirror the segment shapes exactly.
void adam_step(const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads, AdamState& state, double lr,
               const AdamConfig& config = {});

}  // namespace synet
