#pragma once

// Central-finite-difference verification of the analytic gradients through
// every pipeline the trainer uses. The finite-difference side only re-runs
// the forward pass; it never touches the reverse accumulation it checks.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nbestslu/train.hpp"

namespace nbest {

struct GradCheckConfig {
    StrategyKind pipeline = StrategyKind::pooling_avg;
    std::size_t vocab_size = 12; // synthetic id space (no real vocabulary needed)
    std::size_t embed_dim = 4;
    std::size_t hidden_dim = 5;
    std::size_t num_tags = 3;
    std::size_t num_hypotheses = 3; // pooling pipelines
    std::size_t budget_n = 4;       // pooling stack size (> num_hypotheses exercises padding)
    std::size_t seq_len = 4;        // flat pipelines / per-hypothesis length
    std::uint64_t seed = 1;
    double step = 1e-4; // central difference half-width h
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t parameters_checked = 0;
};

namespace detail {

// |a - f| / max(|a|, |f|, floor): the floor keeps near-zero gradients from
// amplifying finite-difference noise into spurious relative error.
inline double relative_error(double analytic, double numeric) {
    double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    return std::abs(analytic - numeric) / scale;
}

struct GradCheckModel {
    Model model;
    PreparedExample example;
};

inline GradCheckModel build_gradcheck_model(const GradCheckConfig& cfg) {
    GradCheckModel out;
    Model& model = out.model;
    Rng rng(cfg.seed);

    std::vector<std::string> tag_names;
    for (std::size_t i = 0; i < cfg.num_tags; ++i) tag_names.push_back("tag" + std::to_string(i));
    model.tags = TagSet(tag_names);
    model.strategy = cfg.pipeline;
    model.hp.embed_dim = cfg.embed_dim;
    model.hp.hidden_dim = cfg.hidden_dim;
    model.hp.n = cfg.budget_n;
    model.encoder.init(cfg.vocab_size, cfg.embed_dim, cfg.hidden_dim, rng);
    model.mlp.init(2 * cfg.hidden_dim, cfg.num_tags, 0, rng);

    auto random_ids = [&](std::size_t len) {
        std::vector<int> ids(len);
        for (int& id : ids) id = static_cast<int>(uniform_index(rng, cfg.vocab_size));
        return ids;
    };
    PreparedExample& ex = out.example;
    ex.label = static_cast<int>(uniform_index(rng, cfg.num_tags));
    if (is_pooling(cfg.pipeline)) {
        for (std::size_t i = 0; i < cfg.num_hypotheses; ++i) {
            ex.hypothesis_ids.push_back(random_ids(cfg.seq_len));
        }
    } else if (cfg.pipeline == StrategyKind::combined_sentence) {
        // hypothesis id runs joined by a dedicated delimiter id, as the
        // combined text encodes to
        std::vector<int> flat;
        int delimiter_id = 0;
        for (std::size_t i = 0; i < cfg.num_hypotheses; ++i) {
            if (i) flat.push_back(delimiter_id);
            std::vector<int> ids = random_ids(cfg.seq_len);
            flat.insert(flat.end(), ids.begin(), ids.end());
        }
        ex.flat_ids = std::move(flat);
    } else {
        ex.flat_ids = random_ids(cfg.seq_len);
    }
    return out;
}

} // namespace detail

// Compares reverse-accumulated gradients against central finite differences
// over every scalar parameter and reports the worst relative error.
inline GradCheckReport gradient_check(const GradCheckConfig& cfg) {
    detail::GradCheckModel gm = detail::build_gradcheck_model(cfg);
    Model& model = gm.model;

    auto loss_value = [&]() {
        Tape t;
        return t.value(example_loss(t, model, gm.example))[0];
    };

    for (Param* p : model.parameters()) p->zero_grad();
    {
        Tape t;
        Var loss = example_loss(t, model, gm.example);
        t.backward(loss);
    }

    GradCheckReport report;
    for (Param* p : model.parameters()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            double saved = p->value[i];
            p->value[i] = saved + cfg.step;
            double up = loss_value();
            p->value[i] = saved - cfg.step;
            double down = loss_value();
            p->value[i] = saved;
            double numeric = (up - down) / (2.0 * cfg.step);
            double rel = detail::relative_error(p->grad[i], numeric);
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name;
                report.worst_index = i;
            }
            ++report.parameters_checked;
        }
    }
    return report;
}

} // namespace nbest
