#include "loadcast/gbrt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadcast/errors.hpp"
#include "loadcast/stats.hpp"

namespace loadcast::gbrt {

namespace {

// Margin, relative to the node's sum of squared targets, that a split gain
// must exceed (over zero, or over the current best) to count. Absorbs rounding
// so that mathematically equal gains keep the lowest (feature, threshold) and
// a node of identical targets never splits.
constexpr double kGainTolerance = 1e-12;

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

// ---------------------------------------------------------------- SampleSet

SampleSet::SampleSet(std::vector<std::string> feature_names, std::vector<double> features,
                     std::vector<double> targets)
    : names_(std::move(feature_names)), features_(std::move(features)), targets_(std::move(targets)) {
    if (features_.size() != targets_.size() * names_.size()) {
        throw InvalidInput("feature matrix size does not match row and column counts");
    }
    if (!all_finite(features_) || !all_finite(targets_)) {
        throw InvalidInput("sample set contains non-finite values");
    }
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows, std::vector<double> targets,
                               std::vector<std::string> feature_names) {
    if (rows.size() != targets.size()) {
        throw InvalidInput("row count differs from target count");
    }
    const std::size_t cols = rows.empty() ? feature_names.size() : rows.front().size();
    if (feature_names.empty()) {
        for (std::size_t c = 0; c < cols; ++c) {
            feature_names.push_back("x" + std::to_string(c));
        }
    }
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) {
            throw InvalidInput("ragged feature rows");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SampleSet(std::move(feature_names), std::move(flat), std::move(targets));
}

SampleSet SampleSet::with_targets(std::vector<double> targets) const {
    if (targets.size() != rows()) {
        throw InvalidInput("replacement targets have the wrong length");
    }
    SampleSet copy;
    copy.names_ = names_;
    copy.features_ = features_;
    copy.targets_ = std::move(targets);
    return copy;
}

// --------------------------------------------------------------------- Loss

Loss Loss::quantile(int alpha) {
    if (alpha < 1 || alpha > 99) {
        throw InvalidInput("quantile loss percentile must be in 1..99, got " + std::to_string(alpha));
    }
    return Loss{Kind::quantile, alpha};
}

double Loss::value(double target, double prediction) const {
    if (kind_ == Kind::squared) {
        const double d = target - prediction;
        return d * d;
    }
    return target < prediction ? (1.0 - tau()) * (prediction - target) : tau() * (target - prediction);
}

std::string Loss::name() const {
    return kind_ == Kind::squared ? "squared" : "quantile(" + std::to_string(alpha_) + ")";
}

Loss Loss::parse(const std::string& name) {
    if (name == "squared") {
        return squared();
    }
    if (name.starts_with("quantile(") && name.ends_with(")")) {
        const auto inner = name.substr(9, name.size() - 10);
        try {
            std::size_t used = 0;
            const int a = std::stoi(inner, &used);
            if (used == inner.size()) {
                return quantile(a);
            }
        } catch (const std::logic_error&) {
        }
    }
    throw InvalidInput("unknown loss '" + name + "'");
}

void BoostConfig::validate() const {
    if (n_trees < 0) {
        throw InvalidInput("n_trees must be >= 0");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw InvalidInput("learning_rate must lie in (0,1]");
    }
    if (max_depth < 1) {
        throw InvalidInput("max_depth must be >= 1");
    }
    if (min_samples_leaf < 1) {
        throw InvalidInput("min_samples_leaf must be >= 1");
    }
}

// ----------------------------------------------------------- RegressionTree

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
        throw InvalidInput("tree without nodes");
    }
    const auto n = static_cast<std::int32_t>(nodes_.size());
    for (const auto& node : nodes_) {
        if (node.is_leaf()) {
            if (!std::isfinite(node.value)) {
                throw InvalidInput("non-finite leaf value");
            }
        } else if (node.left <= 0 || node.right <= 0 || node.left >= n || node.right >= n ||
                   !std::isfinite(node.threshold)) {
            throw InvalidInput("malformed internal node");
        }
    }
}

std::size_t RegressionTree::leaf_index(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                   : node.right);
    }
    return i;
}

int RegressionTree::depth() const {
    // Preorder storage: children always follow their parent.
    std::vector<int> level(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes_[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

// ----------------------------------------------------------------- fit_tree

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const SampleSet& samples, const TreeParams& params)
        : samples_(samples), params_(params), goes_left_(samples.rows(), 0) {}

    RegressionTree build() {
        const std::size_t n = samples_.rows();
        // One index list per feature, sorted by that feature's value; children
        // inherit their order through stable partitioning.
        std::vector<std::vector<std::uint32_t>> sorted(samples_.cols());
        for (std::size_t f = 0; f < samples_.cols(); ++f) {
            auto& idx = sorted[f];
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0U);
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::uint32_t a, std::uint32_t b) { return samples_.at(a, f) < samples_.at(b, f); });
        }
        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0U);
        grow(rows, sorted, 0);
        return RegressionTree(std::move(nodes_));
    }

private:
    std::int32_t grow(const std::vector<std::uint32_t>& rows, std::vector<std::vector<std::uint32_t>>& sorted,
                      int depth) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(TreeNode{});

        const auto targets = samples_.targets();
        double sum = 0.0;
        for (auto r : rows) {
            sum += targets[r];
        }
        const double count = static_cast<double>(rows.size());
        const double mean = sum / count;
        nodes_[static_cast<std::size_t>(id)].value = mean;

        if (depth >= params_.max_depth || rows.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
            return id;
        }
        double sse = 0.0;
        double sum_sq = 0.0;
        for (auto r : rows) {
            sse += (targets[r] - mean) * (targets[r] - mean);
            sum_sq += targets[r] * targets[r];
        }
        const Split split = best_split(sorted, sum, sse, sum_sq);
        if (split.feature < 0) {
            return id;
        }

        const auto f = static_cast<std::size_t>(split.feature);
        for (auto r : rows) {
            goes_left_[r] = samples_.at(r, f) <= split.threshold ? 1 : 0;
        }
        std::vector<std::uint32_t> left_rows;
        std::vector<std::uint32_t> right_rows;
        for (auto r : rows) {
            (goes_left_[r] ? left_rows : right_rows).push_back(r);
        }
        std::vector<std::vector<std::uint32_t>> left_sorted(sorted.size());
        std::vector<std::vector<std::uint32_t>> right_sorted(sorted.size());
        for (std::size_t g = 0; g < sorted.size(); ++g) {
            left_sorted[g].reserve(left_rows.size());
            right_sorted[g].reserve(right_rows.size());
            for (auto r : sorted[g]) {
                (goes_left_[r] ? left_sorted[g] : right_sorted[g]).push_back(r);
            }
        }
        sorted.clear();
        sorted.shrink_to_fit();

        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        const auto left = grow(left_rows, left_sorted, depth + 1);
        const auto right = grow(right_rows, right_sorted, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = left;
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    Split best_split(const std::vector<std::vector<std::uint32_t>>& sorted, double sum, double sse,
                     double sum_sq) const {
        Split best;
        if (!(sse > 0.0)) {
            return best;
        }
        const double tolerance = kGainTolerance * sum_sq;
        const auto targets = samples_.targets();
        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        const std::size_t n = sorted.empty() ? 0 : sorted.front().size();
        const double parent_term = sum * sum / static_cast<double>(n);

        for (std::size_t f = 0; f < sorted.size(); ++f) {
            const auto& idx = sorted[f];
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += targets[idx[i]];
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < min_leaf) {
                    continue;
                }
                if (n_right < min_leaf) {
                    break;
                }
                const double lo = samples_.at(idx[i], f);
                const double hi = samples_.at(idx[i + 1], f);
                if (!(lo < hi)) {
                    continue;
                }
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                    right_sum * right_sum / static_cast<double>(n_right) - parent_term;
                if (gain > best.gain + tolerance) {
                    best = Split{static_cast<int>(f), lo + (hi - lo) / 2.0, gain};
                }
            }
        }
        return best;
    }

    const SampleSet& samples_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
    std::vector<std::uint8_t> goes_left_;
};

} // namespace

RegressionTree fit_tree(const SampleSet& samples, const TreeParams& params) {
    if (samples.empty()) {
        throw InvalidInput("cannot fit a tree to zero samples");
    }
    if (params.max_depth < 1 || params.min_samples_leaf < 1) {
        throw InvalidInput("tree parameters out of range");
    }
    return TreeBuilder(samples, params).build();
}

// ------------------------------------------------------------ loss helpers

double initial_prediction(std::span<const double> targets, const Loss& loss) {
    if (targets.empty()) {
        throw InvalidInput("initial prediction needs at least one target");
    }
    if (!all_finite(targets)) {
        throw InvalidInput("non-finite target");
    }
    if (loss.kind() == Loss::Kind::squared) {
        return stats::mean(targets);
    }
    return stats::percentile(targets, loss.alpha());
}

std::vector<double> negative_gradient(const Loss& loss, std::span<const double> targets,
                                      std::span<const double> predictions) {
    if (targets.size() != predictions.size()) {
        throw InvalidInput("targets and predictions differ in length");
    }
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double y = targets[i];
        const double f = predictions[i];
        if (loss.kind() == Loss::Kind::squared) {
            out[i] = y - f;
        } else if (y > f) {
            out[i] = loss.tau();
        } else if (y < f) {
            out[i] = loss.tau() - 1.0;
        } else {
            out[i] = 0.0;
        }
    }
    return out;
}

double leaf_value(const Loss& loss, std::span<const double> residuals, std::span<const double> targets,
                  std::span<const double> predictions) {
    if (loss.kind() == Loss::Kind::squared) {
        return stats::mean(residuals);
    }
    if (targets.size() != predictions.size() || targets.empty()) {
        throw InvalidInput("leaf targets and predictions must be non-empty and aligned");
    }
    std::vector<double> diff(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        diff[i] = targets[i] - predictions[i];
    }
    return stats::percentile(diff, loss.alpha());
}

// ------------------------------------------------------------ BoostedModel

BoostedModel::BoostedModel(double f0, std::vector<RegressionTree> trees, BoostConfig config,
                           std::size_t n_features)
    : f0_(f0), trees_(std::move(trees)), config_(config), n_features_(n_features) {
    config_.validate();
    if (trees_.size() != static_cast<std::size_t>(config_.n_trees)) {
        throw InvalidInput("tree count differs from config.n_trees");
    }
    if (!std::isfinite(f0_)) {
        throw InvalidInput("non-finite initial prediction");
    }
    for (const auto& tree : trees_) {
        for (const auto& node : tree.nodes()) {
            if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= n_features_) {
                throw InvalidInput("tree references a feature beyond the model arity");
            }
        }
    }
}

void BoostedModel::check_arity(std::span<const double> row) const {
    if (row.size() != n_features_) {
        throw InvalidInput("feature row has " + std::to_string(row.size()) + " values, model expects " +
                           std::to_string(n_features_));
    }
}

double BoostedModel::predict(std::span<const double> row) const {
    return predict_prefix(row, trees_.size());
}

double BoostedModel::predict_prefix(std::span<const double> row, std::size_t n_trees) const {
    check_arity(row);
    n_trees = std::min(n_trees, trees_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n_trees; ++i) {
        acc += trees_[i].evaluate(row);
    }
    return f0_ + config_.learning_rate * acc;
}

BoostedModel fit(const SampleSet& samples, const BoostConfig& config) {
    config.validate();
    if (samples.empty()) {
        throw InvalidInput("cannot fit a model to zero samples");
    }
    const auto y = samples.targets();
    const double f0 = initial_prediction(y, config.loss);
    std::vector<double> current(samples.rows(), f0);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(config.n_trees));
    const TreeParams params{config.max_depth, config.min_samples_leaf};

    for (int i = 0; i < config.n_trees; ++i) {
        auto residuals = negative_gradient(config.loss, y, current);
        auto tree = fit_tree(samples.with_targets(residuals), params);

        // Re-derive every terminal value from the rows that land in it.
        std::vector<std::vector<std::uint32_t>> members(tree.nodes().size());
        std::vector<std::size_t> leaf_of(samples.rows());
        for (std::size_t r = 0; r < samples.rows(); ++r) {
            leaf_of[r] = tree.leaf_index(samples.row(r));
            members[leaf_of[r]].push_back(static_cast<std::uint32_t>(r));
        }
        for (std::size_t node = 0; node < members.size(); ++node) {
            if (members[node].empty()) {
                continue;
            }
            std::vector<double> res;
            std::vector<double> tgt;
            std::vector<double> pred;
            for (auto r : members[node]) {
                res.push_back(residuals[r]);
                tgt.push_back(y[r]);
                pred.push_back(current[r]);
            }
            tree.set_leaf_value(node, leaf_value(config.loss, res, tgt, pred));
        }
        for (std::size_t r = 0; r < samples.rows(); ++r) {
            current[r] += config.learning_rate * tree.nodes()[leaf_of[r]].value;
        }
        trees.push_back(std::move(tree));
    }
    return BoostedModel(f0, std::move(trees), config, samples.cols());
}

// ---------------------------------------------------------- serialization

nlohmann::json to_json(const BoostConfig& config) {
    return {{"n_trees", config.n_trees},
            {"learning_rate", config.learning_rate},
            {"max_depth", config.max_depth},
            {"min_samples_leaf", config.min_samples_leaf},
            {"loss", config.loss.name()}};
}

BoostConfig config_from_json(const nlohmann::json& doc) {
    try {
        BoostConfig c;
        c.n_trees = doc.value("n_trees", c.n_trees);
        c.learning_rate = doc.value("learning_rate", c.learning_rate);
        c.max_depth = doc.value("max_depth", c.max_depth);
        c.min_samples_leaf = doc.value("min_samples_leaf", c.min_samples_leaf);
        c.loss = Loss::parse(doc.value("loss", std::string{"squared"}));
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed boost config: ") + e.what());
    }
}

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) {
        return {{"value", node.value}};
    }
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"left", node_to_json(nodes, static_cast<std::size_t>(node.left))},
            {"right", node_to_json(nodes, static_cast<std::size_t>(node.right))}};
}

std::int32_t node_from_json(const nlohmann::json& doc, std::vector<TreeNode>& out) {
    const auto id = static_cast<std::int32_t>(out.size());
    out.push_back(TreeNode{});
    if (doc.contains("value")) {
        out.back().value = doc.at("value").get<double>();
        return id;
    }
    const auto feature = doc.at("feature").get<std::int32_t>();
    const auto threshold = doc.at("threshold").get<double>();
    if (feature < 0) {
        throw InvalidInput("negative split feature");
    }
    const auto left = node_from_json(doc.at("left"), out);
    const auto right = node_from_json(doc.at("right"), out);
    out[static_cast<std::size_t>(id)] = TreeNode{feature, threshold, left, right, 0.0};
    return id;
}

} // namespace

nlohmann::json to_json(const BoostedModel& model) {
    auto trees = nlohmann::json::array();
    for (const auto& tree : model.trees()) {
        trees.push_back(node_to_json(tree.nodes(), 0));
    }
    return {{"format_version", kModelFormatVersion},
            {"f0", model.f0()},
            {"n_features", model.n_features()},
            {"config", to_json(model.config())},
            {"trees", std::move(trees)}};
}

BoostedModel model_from_json(const nlohmann::json& doc) {
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw InvalidInput("unsupported model format_version " + std::to_string(version));
        }
        std::vector<RegressionTree> trees;
        for (const auto& t : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            node_from_json(t, nodes);
            trees.emplace_back(std::move(nodes));
        }
        return BoostedModel(doc.at("f0").get<double>(), std::move(trees), config_from_json(doc.at("config")),
                            doc.at("n_features").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed model document: ") + e.what());
    }
}

} // namespace loadcast::gbrt
