#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oracle {

double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const auto above = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(below);
    return values[below] + w * (values[above] - values[below]);
}

namespace {

double sum_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

double sse_of(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    const double m = sum_of(v) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s;
}

struct Grower {
    const std::vector<std::vector<double>>& x;
    const std::vector<double>& g;
    const Settings& s;

    std::unique_ptr<Node> grow(const std::vector<int>& idx, int depth) const {
        auto node = std::make_unique<Node>();
        std::vector<double> here;
        for (int i : idx) {
            here.push_back(g[i]);
        }
        node->value = sum_of(here) / static_cast<double>(here.size());
        if (depth == s.max_depth || static_cast<int>(idx.size()) < 2 * s.min_samples_leaf) {
            return node;
        }
        double squares = 0.0;
        for (double v : here) {
            squares += v * v;
        }
        const double parent = sse_of(here);
        const double tol = 1e-12 * squares;

        double best = 0.0;
        int best_f = -1;
        double best_t = 0.0;
        const std::size_t nf = x[0].size();
        for (std::size_t f = 0; f < nf; ++f) {
            std::set<double> distinct;
            for (int i : idx) {
                distinct.insert(x[i][f]);
            }
            std::vector<double> sorted(distinct.begin(), distinct.end());
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                const double t = (sorted[k] + sorted[k + 1]) / 2.0;
                std::vector<double> l;
                std::vector<double> r;
                for (int i : idx) {
                    (x[i][f] <= t ? l : r).push_back(g[i]);
                }
                if (static_cast<int>(l.size()) < s.min_samples_leaf || static_cast<int>(r.size()) < s.min_samples_leaf) {
                    continue;
                }
                const double gain = parent - sse_of(l) - sse_of(r);
                if (gain > best + tol) {
                    best = gain;
                    best_f = static_cast<int>(f);
                    best_t = t;
                }
            }
        }
        if (best_f < 0) {
            return node;
        }
        std::vector<int> li;
        std::vector<int> ri;
        for (int i : idx) {
            (x[i][best_f] <= best_t ? li : ri).push_back(i);
        }
        node->feature = best_f;
        node->threshold = best_t;
        node->left = grow(li, depth + 1);
        node->right = grow(ri, depth + 1);
        return node;
    }
};

Node* find_leaf(Node* n, const std::vector<double>& row) {
    while (n->feature >= 0) {
        n = row[n->feature] <= n->threshold ? n->left.get() : n->right.get();
    }
    return n;
}

void collect_leaves(Node* n, std::vector<Node*>& out) {
    if (n->feature < 0) {
        out.push_back(n);
        return;
    }
    collect_leaves(n->left.get(), out);
    collect_leaves(n->right.get(), out);
}

} // namespace

Ensemble::Ensemble(const std::vector<std::vector<double>>& x, const std::vector<double>& y, const Settings& s)
    : rate_(s.learning_rate) {
    const std::size_t n = y.size();
    f0_ = s.quantile ? percentile(y, s.alpha) : sum_of(y) / static_cast<double>(n);
    std::vector<double> F(n, f0_);
    const double tau = s.alpha / 100.0;

    for (int m = 0; m < s.n_trees; ++m) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!s.quantile) {
                g[i] = y[i] - F[i];
            } else if (y[i] > F[i]) {
                g[i] = tau;
            } else if (y[i] < F[i]) {
                g[i] = tau - 1.0;
            } else {
                g[i] = 0.0;
            }
        }
        std::vector<int> all(n);
        for (std::size_t i = 0; i < n; ++i) {
            all[i] = static_cast<int>(i);
        }
        auto tree = Grower{x, g, s}.grow(all, 0);

        std::vector<Node*> leaves;
        collect_leaves(tree.get(), leaves);
        for (Node* leaf : leaves) {
            std::vector<double> members;
            for (std::size_t i = 0; i < n; ++i) {
                if (find_leaf(tree.get(), x[i]) == leaf) {
                    members.push_back(s.quantile ? y[i] - F[i] : g[i]);
                }
            }
            if (members.empty()) {
                continue;
            }
            leaf->value = s.quantile ? percentile(members, s.alpha) : sum_of(members) / static_cast<double>(members.size());
        }
        for (std::size_t i = 0; i < n; ++i) {
            F[i] += rate_ * find_leaf(tree.get(), x[i])->value;
        }
        trees_.push_back(std::move(tree));
    }
}

double Ensemble::predict(const std::vector<double>& row) const {
    double acc = 0.0;
    for (const auto& t : trees_) {
        acc += find_leaf(t.get(), row)->value;
    }
    return f0_ + rate_ * acc;
}

} // namespace oracle
