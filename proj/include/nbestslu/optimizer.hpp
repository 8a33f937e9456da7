#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nbestslu/autodiff.hpp"
#include "nbestslu/error.hpp"

namespace nbest::nn {

enum class OptimizerKind { sgd, adam };

inline const char* to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw Error(format_msg("unknown optimizer '", s, "' (expected sgd or adam)"));
}

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First-order updates over a fixed parameter list. Adam keeps first/second
// moment accumulators per parameter; plain SGD keeps none.
class Optimizer {
public:
    Optimizer(std::vector<Param*> params, OptimizerConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {
        if (cfg_.learning_rate <= 0.0) {
            // lr == 0 is allowed as the degenerate "no update" configuration
            if (cfg_.learning_rate < 0.0) throw Error("learning rate must be non-negative");
        }
        if (cfg_.kind == OptimizerKind::adam) {
            first_.reserve(params_.size());
            second_.reserve(params_.size());
            for (const Param* p : params_) {
                first_.emplace_back(p->value.shape());
                second_.emplace_back(p->value.shape());
            }
        }
    }

    std::uint64_t step_count() const { return step_; }

    // Applies one update using the accumulated gradients scaled by
    // `grad_scale` (1/batch for mean-of-batch gradients), then zeroes them.
    void step(double grad_scale) {
        ++step_;
        if (cfg_.kind == OptimizerKind::sgd) {
            for (Param* p : params_) {
                double* v = p->value.data();
                const double* g = p->grad.data();
                for (std::size_t i = 0; i < p->value.size(); ++i) {
                    v[i] -= cfg_.learning_rate * grad_scale * g[i];
                }
            }
        } else {
            double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
            double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
            for (std::size_t pi = 0; pi < params_.size(); ++pi) {
                Param* p = params_[pi];
                double* v = p->value.data();
                const double* g = p->grad.data();
                double* m = first_[pi].data();
                double* s = second_[pi].data();
                for (std::size_t i = 0; i < p->value.size(); ++i) {
                    double gi = grad_scale * g[i];
                    m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
                    s[i] = cfg_.beta2 * s[i] + (1.0 - cfg_.beta2) * gi * gi;
                    double mhat = m[i] / bc1;
                    double shat = s[i] / bc2;
                    v[i] -= cfg_.learning_rate * mhat / (std::sqrt(shat) + cfg_.epsilon);
                }
            }
        }
        for (Param* p : params_) {
            require_finite(p->value, p->name.c_str());
            p->zero_grad();
        }
    }

private:
    std::vector<Param*> params_;
    OptimizerConfig cfg_;
    std::uint64_t step_ = 0;
    std::vector<Tensor> first_, second_;
};

} // namespace nbest::nn
