#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dialsum/io.hpp"

namespace dialsum {

// Row-major double matrix. Doubles keep finite-difference gradient checks
// well inside 1e-4 relative error.
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    static Mat randn(size_t r, size_t c, double stddev, std::mt19937_64& rng) {
        Mat m(r, c);
        std::normal_distribution<double> dist(0.0, stddev);
        for (auto& x : m.data) x = dist(rng);
        return m;
    }
};

// Named parameter with a persistent gradient accumulator.
struct Param {
    std::string name;
    Mat value;
    Mat grad;

    Param() = default;
    Param(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
        grad = Mat(value.rows, value.cols);
    }
};

// Reverse-mode tape. Nodes are created in topological order; backward walks
// the tape in reverse. Leafs bound to a Param accumulate into Param::grad.
class Tape {
public:
    struct Node {
        Mat val;
        Mat grad;
        std::function<void(Node&)> back;  // reads this->grad, writes parents
    };
    using NodeRef = std::shared_ptr<Node>;

    NodeRef leaf(const Mat& v, Mat* grad_sink = nullptr) {
        NodeRef n = make(v.rows, v.cols);
        n->val = v;
        if (grad_sink) {
            n->back = [grad_sink](Node& self) {
                for (size_t i = 0; i < self.grad.size(); ++i)
                    grad_sink->data[i] += self.grad.data[i];
            };
        }
        return n;
    }

    NodeRef param(Param& p) { return leaf(p.value, &p.grad); }

    // out[r] = table[indices[r]]
    NodeRef embed(NodeRef table, std::span<const int> indices) {
        NodeRef n = make(indices.size(), table->val.cols);
        for (size_t r = 0; r < indices.size(); ++r) {
            size_t src = check_index(indices[r], table->val.rows, "embed");
            for (size_t c = 0; c < table->val.cols; ++c)
                n->val.at(r, c) = table->val.at(src, c);
        }
        std::vector<int> idx(indices.begin(), indices.end());
        n->back = [table, idx](Node& self) {
            for (size_t r = 0; r < idx.size(); ++r) {
                size_t dst = static_cast<size_t>(idx[r]);
                for (size_t c = 0; c < self.grad.cols; ++c)
                    table->grad.at(dst, c) += self.grad.at(r, c);
            }
        };
        return n;
    }

    NodeRef matmul(NodeRef a, NodeRef b) {
        if (a->val.cols != b->val.rows) throw Error("matmul: shape mismatch");
        NodeRef n = make(a->val.rows, b->val.cols);
        gemm(a->val, b->val, n->val, false, false);
        n->back = [a, b](Node& self) {
            gemm_acc(self.grad, b->val, a->grad, false, true);   // dA += dC * B^T
            gemm_acc(a->val, self.grad, b->grad, true, false);   // dB += A^T * dC
        };
        return n;
    }

    // a * b^T
    NodeRef matmul_nt(NodeRef a, NodeRef b) {
        if (a->val.cols != b->val.cols) throw Error("matmul_nt: shape mismatch");
        NodeRef n = make(a->val.rows, b->val.rows);
        gemm(a->val, b->val, n->val, false, true);
        n->back = [a, b](Node& self) {
            gemm_acc(self.grad, b->val, a->grad, false, false);  // dA += dC * B
            gemm_acc(self.grad, a->val, b->grad, true, false);   // dB += dC^T * A
        };
        return n;
    }

    NodeRef add(NodeRef a, NodeRef b) {
        check_same(a, b, "add");
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t i = 0; i < n->val.size(); ++i) n->val.data[i] = a->val.data[i] + b->val.data[i];
        n->back = [a, b](Node& self) {
            for (size_t i = 0; i < self.grad.size(); ++i) {
                a->grad.data[i] += self.grad.data[i];
                b->grad.data[i] += self.grad.data[i];
            }
        };
        return n;
    }

    // Broadcast a 1 x cols bias row over every row of a.
    NodeRef add_row(NodeRef a, NodeRef row) {
        if (row->val.rows != 1 || row->val.cols != a->val.cols)
            throw Error("add_row: shape mismatch");
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t r = 0; r < a->val.rows; ++r)
            for (size_t c = 0; c < a->val.cols; ++c)
                n->val.at(r, c) = a->val.at(r, c) + row->val.at(0, c);
        n->back = [a, row](Node& self) {
            for (size_t r = 0; r < self.grad.rows; ++r)
                for (size_t c = 0; c < self.grad.cols; ++c) {
                    a->grad.at(r, c) += self.grad.at(r, c);
                    row->grad.at(0, c) += self.grad.at(r, c);
                }
        };
        return n;
    }

    NodeRef scale(NodeRef a, double s) {
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t i = 0; i < n->val.size(); ++i) n->val.data[i] = a->val.data[i] * s;
        n->back = [a, s](Node& self) {
            for (size_t i = 0; i < self.grad.size(); ++i) a->grad.data[i] += self.grad.data[i] * s;
        };
        return n;
    }

    // Adds a constant matrix (no gradient), e.g. a causal attention mask.
    NodeRef add_const(NodeRef a, const Mat& k) {
        check_shape(a, k, "add_const");
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t i = 0; i < n->val.size(); ++i) n->val.data[i] = a->val.data[i] + k.data[i];
        n->back = [a](Node& self) {
            for (size_t i = 0; i < self.grad.size(); ++i) a->grad.data[i] += self.grad.data[i];
        };
        return n;
    }

    NodeRef relu(NodeRef a) {
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t i = 0; i < n->val.size(); ++i) n->val.data[i] = std::max(0.0, a->val.data[i]);
        n->back = [a](Node& self) {
            for (size_t i = 0; i < self.grad.size(); ++i)
                if (a->val.data[i] > 0.0) a->grad.data[i] += self.grad.data[i];
        };
        return n;
    }

    // Per-row layer norm with learned gain/bias rows.
    NodeRef layer_norm(NodeRef x, NodeRef gain, NodeRef bias, double eps = 1e-5) {
        size_t R = x->val.rows, C = x->val.cols;
        if (gain->val.cols != C || bias->val.cols != C)
            throw Error("layer_norm: shape mismatch");
        NodeRef n = make(R, C);
        auto xhat = std::make_shared<Mat>(R, C);
        auto inv_sigma = std::make_shared<std::vector<double>>(R);
        for (size_t r = 0; r < R; ++r) {
            double mu = 0.0;
            for (size_t c = 0; c < C; ++c) mu += x->val.at(r, c);
            mu /= C;
            double var = 0.0;
            for (size_t c = 0; c < C; ++c) {
                double d = x->val.at(r, c) - mu;
                var += d * d;
            }
            var /= C;
            double is = 1.0 / std::sqrt(var + eps);
            (*inv_sigma)[r] = is;
            for (size_t c = 0; c < C; ++c) {
                double h = (x->val.at(r, c) - mu) * is;
                xhat->at(r, c) = h;
                n->val.at(r, c) = h * gain->val.at(0, c) + bias->val.at(0, c);
            }
        }
        n->back = [x, gain, bias, xhat, inv_sigma](Node& self) {
            size_t R = self.grad.rows, C = self.grad.cols;
            for (size_t r = 0; r < R; ++r) {
                double mean_rg = 0.0, mean_rgh = 0.0;
                for (size_t c = 0; c < C; ++c) {
                    double rg = self.grad.at(r, c) * gain->val.at(0, c);
                    mean_rg += rg;
                    mean_rgh += rg * xhat->at(r, c);
                    gain->grad.at(0, c) += self.grad.at(r, c) * xhat->at(r, c);
                    bias->grad.at(0, c) += self.grad.at(r, c);
                }
                mean_rg /= C;
                mean_rgh /= C;
                for (size_t c = 0; c < C; ++c) {
                    double rg = self.grad.at(r, c) * gain->val.at(0, c);
                    x->grad.at(r, c) +=
                        (rg - mean_rg - xhat->at(r, c) * mean_rgh) * (*inv_sigma)[r];
                }
            }
        };
        return n;
    }

    NodeRef softmax_rows(NodeRef a) {
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t r = 0; r < a->val.rows; ++r) {
            double mx = -1e300;
            for (size_t c = 0; c < a->val.cols; ++c) mx = std::max(mx, a->val.at(r, c));
            double z = 0.0;
            for (size_t c = 0; c < a->val.cols; ++c) z += std::exp(a->val.at(r, c) - mx);
            for (size_t c = 0; c < a->val.cols; ++c)
                n->val.at(r, c) = std::exp(a->val.at(r, c) - mx) / z;
        }
        n->back = [a](Node& self) {
            for (size_t r = 0; r < self.grad.rows; ++r) {
                double dot = 0.0;
                for (size_t c = 0; c < self.grad.cols; ++c)
                    dot += self.grad.at(r, c) * self.val.at(r, c);
                for (size_t c = 0; c < self.grad.cols; ++c)
                    a->grad.at(r, c) += (self.grad.at(r, c) - dot) * self.val.at(r, c);
            }
        };
        return n;
    }

    NodeRef log_softmax_rows(NodeRef a) {
        NodeRef n = make(a->val.rows, a->val.cols);
        for (size_t r = 0; r < a->val.rows; ++r) {
            double mx = -1e300;
            for (size_t c = 0; c < a->val.cols; ++c) mx = std::max(mx, a->val.at(r, c));
            double z = 0.0;
            for (size_t c = 0; c < a->val.cols; ++c) z += std::exp(a->val.at(r, c) - mx);
            double lse = mx + std::log(z);
            for (size_t c = 0; c < a->val.cols; ++c) n->val.at(r, c) = a->val.at(r, c) - lse;
        }
        n->back = [a](Node& self) {
            for (size_t r = 0; r < self.grad.rows; ++r) {
                double sum = 0.0;
                for (size_t c = 0; c < self.grad.cols; ++c) sum += self.grad.at(r, c);
                for (size_t c = 0; c < self.grad.cols; ++c)
                    a->grad.at(r, c) +=
                        self.grad.at(r, c) - std::exp(self.val.at(r, c)) * sum;
            }
        };
        return n;
    }

    // Inverted dropout; identity when p == 0.
    NodeRef dropout(NodeRef a, double p, std::mt19937_64& rng) {
        if (p <= 0.0) return a;
        NodeRef n = make(a->val.rows, a->val.cols);
        auto mask = std::make_shared<std::vector<double>>(a->val.size());
        std::bernoulli_distribution keep(1.0 - p);
        double scale = 1.0 / (1.0 - p);
        for (size_t i = 0; i < a->val.size(); ++i) {
            (*mask)[i] = keep(rng) ? scale : 0.0;
            n->val.data[i] = a->val.data[i] * (*mask)[i];
        }
        n->back = [a, mask](Node& self) {
            for (size_t i = 0; i < self.grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i] * (*mask)[i];
        };
        return n;
    }

    // Prefix-masked mean NLL over a log-probability table:
    //   L = -(1/(l-a)) * sum_{t=a..l-1} logprobs[t, targets[t]]
    // Rows 0..a-1 contribute nothing to the value or the gradient.
    NodeRef prefix_guided_nll(NodeRef logprobs, std::span<const int> targets, int prefix_len) {
        int l = static_cast<int>(targets.size());
        if (static_cast<int>(logprobs->val.rows) != l)
            throw Error("prefix_guided_nll: table rows != target length");
        if (prefix_len < 0 || prefix_len >= l)
            throw Error("prefix_guided_nll: prefix length must satisfy 0 <= a <= l-1");
        NodeRef n = make(1, 1);
        double acc = 0.0;
        for (int t = prefix_len; t < l; ++t)
            acc += logprobs->val.at(static_cast<size_t>(t),
                                    check_index(targets[t], logprobs->val.cols, "prefix_guided_nll"));
        double denom = static_cast<double>(l - prefix_len);
        n->val.at(0, 0) = -acc / denom;
        std::vector<int> tgt(targets.begin(), targets.end());
        n->back = [logprobs, tgt, prefix_len, denom](Node& self) {
            double g = self.grad.at(0, 0);
            for (int t = prefix_len; t < static_cast<int>(tgt.size()); ++t)
                logprobs->grad.at(static_cast<size_t>(t), static_cast<size_t>(tgt[t])) -=
                    g / denom;
        };
        return n;
    }

    // Seeds d(loss)=1 and walks the tape in reverse creation order.
    void backward(NodeRef loss) {
        if (loss->val.rows != 1 || loss->val.cols != 1)
            throw Error("backward: loss must be scalar");
        for (auto& n : order_)
            if (n->grad.size() != n->val.size()) n->grad = Mat(n->val.rows, n->val.cols);
        loss->grad.at(0, 0) = 1.0;
        for (auto it = order_.rbegin(); it != order_.rend(); ++it)
            if ((*it)->back) (*it)->back(**it);
    }

private:
    NodeRef make(size_t r, size_t c) {
        NodeRef n = std::make_shared<Node>();
        n->val = Mat(r, c);
        order_.push_back(n);
        return n;
    }

    static void check_same(const NodeRef& a, const NodeRef& b, const char* op) {
        if (a->val.rows != b->val.rows || a->val.cols != b->val.cols)
            throw Error(std::string(op) + ": shape mismatch");
    }
    static void check_shape(const NodeRef& a, const Mat& k, const char* op) {
        if (a->val.rows != k.rows || a->val.cols != k.cols)
            throw Error(std::string(op) + ": shape mismatch");
    }
    static size_t check_index(int idx, size_t limit, const char* op) {
        if (idx < 0 || static_cast<size_t>(idx) >= limit)
            throw Error(std::string(op) + ": index out of range");
        return static_cast<size_t>(idx);
    }

    // c (+)= op(a) * op(b)
    static void gemm(const Mat& a, const Mat& b, Mat& c, bool ta, bool tb) {
        c.zero();
        gemm_acc(a, b, c, ta, tb);
    }
    static void gemm_acc(const Mat& a, const Mat& b, Mat& c, bool ta, bool tb) {
        size_t m = ta ? a.cols : a.rows;
        size_t k = ta ? a.rows : a.cols;
        size_t n = tb ? b.rows : b.cols;
        size_t kb = tb ? b.cols : b.rows;
        if (k != kb || c.rows != m || c.cols != n) throw Error("gemm: shape mismatch");
        for (size_t i = 0; i < m; ++i)
            for (size_t kk = 0; kk < k; ++kk) {
                double av = ta ? a.at(kk, i) : a.at(i, kk);
                if (av == 0.0) continue;
                for (size_t j = 0; j < n; ++j)
                    c.at(i, j) += av * (tb ? b.at(j, kk) : b.at(kk, j));
            }
    }

    std::vector<NodeRef> order_;
};

// Decoupled weight decay Adam over a fixed parameter list.
class AdamW {
public:
    AdamW(std::vector<Param*> params, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8)
        : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (Param* p : params_) {
            m_.emplace_back(p->value.rows, p->value.cols);
            v_.emplace_back(p->value.rows, p->value.cols);
        }
    }

    void step(double lr, double weight_decay) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            Param& p = *params_[i];
            for (size_t j = 0; j < p.value.size(); ++j) {
                double g = p.grad.data[j];
                m_[i].data[j] = beta1_ * m_[i].data[j] + (1.0 - beta1_) * g;
                v_[i].data[j] = beta2_ * v_[i].data[j] + (1.0 - beta2_) * g * g;
                double mhat = m_[i].data[j] / bc1;
                double vhat = v_[i].data[j] / bc2;
                p.value.data[j] -=
                    lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay * p.value.data[j]);
            }
        }
    }

    int64_t steps() const { return t_; }

private:
    std::vector<Param*> params_;
    std::vector<Mat> m_, v_;
    double beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

// Pure prefix-masked loss over an already-materialized log-probability table.
// The vanilla generation loss is exactly this with a = 0.
inline double prefix_guided_loss(const Mat& logprob_table, std::span<const int> targets, int prefix_len) {
    int l = static_cast<int>(targets.size());
    if (l == 0) throw Error("prefix_guided_loss: empty target");
    if (static_cast<int>(logprob_table.rows) != l)
        throw Error("prefix_guided_loss: table rows != target length");
    if (prefix_len < 0 || prefix_len >= l)
        throw Error("prefix_guided_loss: prefix length must satisfy 0 <= a <= l-1");
    double acc = 0.0;
    for (int t = prefix_len; t < l; ++t) {
        int tok = targets[t];
        if (tok < 0 || static_cast<size_t>(tok) >= logprob_table.cols)
            throw Error("prefix_guided_loss: target id out of range");
        acc += logprob_table.at(static_cast<size_t>(t), static_cast<size_t>(tok));
    }
    return -acc / static_cast<double>(l - prefix_len);
}

inline double vanilla_generation_loss(const Mat& logprob_table, std::span<const int> targets) {
    return prefix_guided_loss(logprob_table, targets, 0);
}

}  // namespace dialsum
