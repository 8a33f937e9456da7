#pragma once

// Reverse-mode automatic differentiation over a per-example tape.
//
// A Tape records every operation of one forward pass in execution order;
// backward() replays the records in reverse, which is a valid topological
// order because nodes are only ever built from earlier nodes. One tape per
// training example; a tape is written by a single thread.

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nbestslu/error.hpp"
#include "nbestslu/tensor.hpp"

namespace nbest::nn {

// A named trainable tensor. `grad` is scratch storage that backward passes
// accumulate into; it is mutable so inference over a const model stays const.
struct Param {
    std::string name;
    Tensor value;
    mutable Tensor grad;

    Param() = default;
    Param(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

    void zero_grad() const { grad.fill(0.0); }
};

struct Var {
    std::size_t index = static_cast<std::size_t>(-1);
    bool valid() const { return index != static_cast<std::size_t>(-1); }
};

enum class Activation { sigmoid, tanh };

inline double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

class Tape {
public:
    static constexpr double kLogFloor = 1e-12; // clamp inside cross_entropy

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t size() const { return nodes_.size(); }

    const Tensor& value(Var v) const { return node(v).value_ref(); }
    const Tensor& grad(Var v) const { return node(v).grad; }

    // ---- leaves ------------------------------------------------------

    Var constant(Tensor value) {
        return push(std::move(value), std::function<void(Tape&, std::size_t)>());
    }

    Var zeros(std::size_t dim) { return constant(Tensor({dim})); }

    // Binds a parameter once per tape; repeated calls return the same node,
    // so gradient contributions from every use accumulate on one slot.
    Var param(const Param& p) {
        auto it = bound_.find(&p);
        if (it != bound_.end()) return it->second;
        std::size_t idx = nodes_.size();
        Node n;
        n.external = &p.value;
        n.grad = Tensor(p.value.shape());
        n.backprop = [&p](Tape& t, std::size_t self) {
            p.grad.add_scaled(t.nodes_[self].grad, 1.0);
        };
        nodes_.push_back(std::move(n));
        Var v{idx};
        bound_.emplace(&p, v);
        return v;
    }

    // Embedding-row lookup. Gradients scatter straight into the table's rows
    // instead of materializing a dense table-sized node per example.
    Var embed_row(const Param& table, std::size_t row) {
        if (table.value.shape().size() != 2) {
            throw DimensionError(format_msg("embedding table must be rank 2, got ",
                                            table.value.shape_str()));
        }
        std::size_t vocab = table.value.rows();
        std::size_t dim = table.value.cols();
        if (row >= vocab) {
            throw Error(format_msg("embedding id ", row, " out of range (vocabulary size ",
                                   vocab, ")"));
        }
        Tensor out({dim});
        const double* src = table.value.data() + row * dim;
        for (std::size_t i = 0; i < dim; ++i) out[i] = src[i];
        return push(std::move(out), [&table, row, dim](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            double* dst = table.grad.data() + row * dim;
            for (std::size_t i = 0; i < dim; ++i) dst[i] += g[i];
        });
    }

    // ---- operations --------------------------------------------------

    // W.x + b with W [out x in], x [in], b [out]
    Var affine(Var wv, Var xv, Var bv) {
        const Tensor& w = value(wv);
        const Tensor& x = value(xv);
        const Tensor& b = value(bv);
        if (w.shape().size() != 2 || x.shape().size() != 1 || w.cols() != x.size()) {
            throw DimensionError(format_msg("affine: weight ", w.shape_str(),
                                            " incompatible with input ", x.shape_str()));
        }
        if (b.shape().size() != 1 || b.size() != w.rows()) {
            throw DimensionError(format_msg("affine: bias ", b.shape_str(),
                                            " incompatible with weight ", w.shape_str()));
        }
        std::size_t out_dim = w.rows(), in_dim = w.cols();
        Tensor y({out_dim});
        const double* wd = w.data();
        for (std::size_t i = 0; i < out_dim; ++i) {
            double acc = b[i];
            const double* row = wd + i * in_dim;
            for (std::size_t j = 0; j < in_dim; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
        return push(std::move(y), [wv, xv, bv, out_dim, in_dim](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& w = t.value(wv);
            const Tensor& x = t.value(xv);
            Tensor& gw = t.nodes_[wv.index].grad;
            Tensor& gx = t.nodes_[xv.index].grad;
            Tensor& gb = t.nodes_[bv.index].grad;
            for (std::size_t i = 0; i < out_dim; ++i) {
                double gi = g[i];
                gb[i] += gi;
                double* gwrow = gw.data() + i * in_dim;
                const double* wrow = w.data() + i * in_dim;
                for (std::size_t j = 0; j < in_dim; ++j) {
                    gwrow[j] += gi * x[j];
                    gx[j] += gi * wrow[j];
                }
            }
        });
    }

    Var add(Var av, Var bv) { return binary_elementwise(av, bv, /*subtract=*/false); }
    Var sub(Var av, Var bv) { return binary_elementwise(av, bv, /*subtract=*/true); }

    // Hadamard product
    Var mul(Var av, Var bv) {
        const Tensor& a = value(av);
        const Tensor& b = value(bv);
        require_same_shape(a, b, "mul");
        Tensor y(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * b[i];
        return push(std::move(y), [av, bv](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& a = t.value(av);
            const Tensor& b = t.value(bv);
            Tensor& ga = t.nodes_[av.index].grad;
            Tensor& gb = t.nodes_[bv.index].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * b[i];
                gb[i] += g[i] * a[i];
            }
        });
    }

    Var activation(Var xv, Activation kind) {
        const Tensor& x = value(xv);
        Tensor y(x.shape());
        if (kind == Activation::sigmoid) {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
        } else {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
        }
        return push(std::move(y), [xv, kind](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value_ref();
            Tensor& gx = t.nodes_[xv.index].grad;
            if (kind == Activation::sigmoid) {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
            } else {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
            }
        });
    }

    Var sigmoid(Var x) { return activation(x, Activation::sigmoid); }
    Var tanh(Var x) { return activation(x, Activation::tanh); }

    Var concat(Var av, Var bv) {
        const Tensor& a = value(av);
        const Tensor& b = value(bv);
        if (a.shape().size() != 1 || b.shape().size() != 1) {
            throw DimensionError(format_msg("concat expects vectors, got ", a.shape_str(),
                                            " and ", b.shape_str()));
        }
        Tensor y({a.size() + b.size()});
        for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i];
        for (std::size_t i = 0; i < b.size(); ++i) y[a.size() + i] = b[i];
        std::size_t split = a.size();
        return push(std::move(y), [av, bv, split](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[av.index].grad;
            Tensor& gb = t.nodes_[bv.index].grad;
            for (std::size_t i = 0; i < split; ++i) ga[i] += g[i];
            for (std::size_t i = split; i < g.size(); ++i) gb[i - split] += g[i];
        });
    }

    // Numerically stable softmax over a vector (max subtraction).
    Var softmax(Var zv) {
        const Tensor& z = value(zv);
        if (z.shape().size() != 1 || z.size() == 0) {
            throw DimensionError(format_msg("softmax needs a non-empty vector, got ",
                                            z.shape_str()));
        }
        double mx = z[0];
        for (std::size_t i = 1; i < z.size(); ++i) mx = std::max(mx, z[i]);
        Tensor p(z.shape());
        double denom = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            p[i] = std::exp(z[i] - mx);
            denom += p[i];
        }
        for (std::size_t i = 0; i < z.size(); ++i) p[i] /= denom;
        return push(std::move(p), [zv](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& p = t.nodes_[self].value_ref();
            Tensor& gz = t.nodes_[zv.index].grad;
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * p[i];
            for (std::size_t i = 0; i < g.size(); ++i) gz[i] += p[i] * (g[i] - dot);
        });
    }

    // -ln(p[true_index]) with a floor keeping the log away from -inf.
    Var cross_entropy(Var pv, std::size_t true_index) {
        const Tensor& p = value(pv);
        if (p.shape().size() != 1) {
            throw DimensionError(format_msg("cross_entropy expects a vector, got ",
                                            p.shape_str()));
        }
        if (true_index >= p.size()) {
            throw Error(format_msg("cross_entropy: class index ", true_index,
                                   " out of range for ", p.size(), " classes"));
        }
        double pt = std::max(p[true_index], kLogFloor);
        return push(Tensor::scalar(-std::log(pt)),
                    [pv, true_index](Tape& t, std::size_t self) {
                        const Tensor& p = t.value(pv);
                        double g0 = t.nodes_[self].grad[0];
                        if (p[true_index] > kLogFloor) {
                            t.nodes_[pv.index].grad[true_index] += -g0 / p[true_index];
                        }
                        // inside the clamp the loss is constant in p
                    });
    }

    // Coordinate-wise mean over equally shaped vectors. Computed as a running
    // mean so that averaging identical rows reproduces the row bit for bit.
    Var mean_rows(const std::vector<Var>& rows) {
        require_stack(rows, "mean_rows");
        Tensor m = value(rows[0]);
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const Tensor& x = value(rows[k]);
            double inv = 1.0 / static_cast<double>(k + 1);
            for (std::size_t i = 0; i < m.size(); ++i) m[i] += (x[i] - m[i]) * inv;
        }
        std::size_t n = rows.size();
        return push(std::move(m), [rows, n](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            double inv = 1.0 / static_cast<double>(n);
            for (Var r : rows) t.nodes_[r.index].grad.add_scaled(g, inv);
        });
    }

    // Coordinate-wise max; ties go to the earliest row, and the gradient is
    // routed only to the winning row per coordinate.
    Var max_rows(const std::vector<Var>& rows) {
        require_stack(rows, "max_rows");
        Tensor m = value(rows[0]);
        std::vector<std::uint32_t> winner(m.size(), 0);
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const Tensor& x = value(rows[k]);
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (x[i] > m[i]) {
                    m[i] = x[i];
                    winner[i] = static_cast<std::uint32_t>(k);
                }
            }
        }
        return push(std::move(m), [rows, winner = std::move(winner)](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                t.nodes_[rows[winner[i]].index].grad[i] += g[i];
            }
        });
    }

    // ---- reverse accumulation -----------------------------------------

    // Fills the grad slot of every node (and bound Param) reachable from
    // `loss` with d loss / d node. Call once per tape.
    void backward(Var loss) {
        const Tensor& l = value(loss);
        if (l.size() != 1) {
            throw Error(format_msg("backward needs a scalar loss, got ", l.shape_str()));
        }
        if (backward_done_) throw Error("backward already ran on this tape");
        backward_done_ = true;
        nodes_[loss.index].grad[0] = 1.0;
        for (std::size_t i = loss.index + 1; i-- > 0;) {
            if (nodes_[i].backprop) nodes_[i].backprop(*this, i);
        }
    }

private:
    struct Node {
        Tensor value;                    // owned storage (unused for param leaves)
        const Tensor* external = nullptr; // set for param leaves
        Tensor grad;
        std::function<void(Tape&, std::size_t)> backprop;

        const Tensor& value_ref() const { return external ? *external : value; }
    };

    const Node& node(Var v) const {
        if (!v.valid() || v.index >= nodes_.size()) throw Error("invalid tape variable");
        return nodes_[v.index];
    }

    template <typename F>
    Var push(Tensor value, F&& back) {
        Node n;
        n.grad = Tensor(value.shape());
        n.value = std::move(value);
        n.backprop = std::forward<F>(back);
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    Var binary_elementwise(Var av, Var bv, bool subtract) {
        const Tensor& a = value(av);
        const Tensor& b = value(bv);
        require_same_shape(a, b, subtract ? "sub" : "add");
        Tensor y(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) y[i] = subtract ? a[i] - b[i] : a[i] + b[i];
        return push(std::move(y), [av, bv, subtract](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            t.nodes_[av.index].grad.add_scaled(g, 1.0);
            t.nodes_[bv.index].grad.add_scaled(g, subtract ? -1.0 : 1.0);
        });
    }

    static void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
        if (!a.same_shape(b)) {
            throw DimensionError(format_msg(op, ": shape ", a.shape_str(),
                                            " does not match ", b.shape_str()));
        }
    }

    void require_stack(const std::vector<Var>& rows, const char* op) const {
        if (rows.empty()) throw Error(format_msg(op, ": empty row stack"));
        const Tensor& first = value(rows[0]);
        if (first.shape().size() != 1) {
            throw DimensionError(format_msg(op, " expects vectors, got ", first.shape_str()));
        }
        for (Var r : rows) require_same_shape(value(r), first, op);
    }

    // deque: growing the tape never invalidates value()/grad() references
    std::deque<Node> nodes_;
    std::unordered_map<const Param*, Var> bound_;
    bool backward_done_ = false;
};

} // namespace nbest::nn
