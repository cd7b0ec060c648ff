#pragma once
// Sparse Adam. Moment vectors are allocated lazily for touched slots only;
// bias correction uses the global step count.

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "kgval/model.hpp"

namespace kgval {

class AdamOptimizer {
public:
    explicit AdamOptimizer(double learning_rate) : lr_(learning_rate) {}

    double learning_rate() const { return lr_; }
    std::uint64_t step_count() const { return step_; }

    // One optimization step over the touched slots, in first-touch order.
    void apply(EmbeddingModel& model, const GradientBuffer& grads) {
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
        for (std::size_t i = 0; i < grads.order_.size(); ++i) {
            const std::uint64_t key = grads.order_[i];
            const std::vector<double>& g = grads.grads_[i];
            Moments& mo = moments_[key];
            if (mo.m.empty()) {
                mo.m.assign(g.size(), 0.0);
                mo.v.assign(g.size(), 0.0);
            }
            const bool is_relation = (key >> 32) != 0;
            const auto id = static_cast<std::uint32_t>(key & 0xffffffffu);
            std::span<double> params = is_relation ? model.relation(id) : model.entity(id);
            for (std::size_t j = 0; j < g.size(); ++j) {
                mo.m[j] = beta1_ * mo.m[j] + (1.0 - beta1_) * g[j];
                mo.v[j] = beta2_ * mo.v[j] + (1.0 - beta2_) * g[j] * g[j];
                const double mhat = mo.m[j] / bc1;
                const double vhat = mo.v[j] / bc2;
                params[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };

    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::uint64_t step_ = 0;
    std::unordered_map<std::uint64_t, Moments> moments_;
};

}  // namespace kgval
