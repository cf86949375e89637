#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace loadcast::gbrt {

/// Row-major feature matrix plus regression targets.
class SampleSet {
public:
    SampleSet() = default;

    /// `features` holds rows.size() * names.size() values in row-major order.
    SampleSet(std::vector<std::string> feature_names, std::vector<double> features,
              std::vector<double> targets);

    /// Convenience for small hand-written fixtures.
    static SampleSet from_rows(const std::vector<std::vector<double>>& rows,
                               std::vector<double> targets,
                               std::vector<std::string> feature_names = {});

    std::size_t rows() const noexcept { return targets_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }
    bool empty() const noexcept { return targets_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * cols(), cols()};
    }
    double at(std::size_t row, std::size_t col) const { return features_[row * cols() + col]; }

    std::span<const double> targets() const noexcept { return targets_; }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }

    /// Copy with the targets swapped out; used to fit trees to pseudo-residuals.
    SampleSet with_targets(std::vector<double> targets) const;

private:
    std::vector<std::string> names_;
    std::vector<double> features_;
    std::vector<double> targets_;
};

class Loss {
public:
    enum class Kind { squared, quantile };

    static Loss squared() { return Loss{Kind::squared, 0}; }
    /// `alpha` is the target percentile, 1..99.
    static Loss quantile(int alpha);

    Kind kind() const noexcept { return kind_; }
    int alpha() const noexcept { return alpha_; }
    double tau() const noexcept { return alpha_ / 100.0; }

    /// Squared error or pinball loss of a single prediction.
    double value(double target, double prediction) const;

    std::string name() const;
    static Loss parse(const std::string& name);

    friend bool operator==(const Loss&, const Loss&) = default;

private:
    Loss(Kind kind, int alpha) : kind_(kind), alpha_(alpha) {}

    Kind kind_ = Kind::squared;
    int alpha_ = 0;
};

struct BoostConfig {
    int n_trees = 50;
    double learning_rate = 0.1;
    int max_depth = 5;
    int min_samples_leaf = 1;
    Loss loss = Loss::squared();

    /// Throws InvalidInput when a field is out of range.
    void validate() const;

    friend bool operator==(const BoostConfig&, const BoostConfig&) = default;
};

/// Flat node storage. A node is a leaf iff `feature < 0`; children are
/// indices into the owning tree's node vector.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

class RegressionTree {
public:
    RegressionTree() : nodes_{TreeNode{}} {}
    explicit RegressionTree(std::vector<TreeNode> nodes);

    static RegressionTree leaf(double value) { return RegressionTree{{TreeNode{-1, 0.0, -1, -1, value}}}; }

    /// Index of the leaf reached by `row`: left iff value <= threshold.
    std::size_t leaf_index(std::span<const double> row) const;
    double evaluate(std::span<const double> row) const { return nodes_[leaf_index(row)].value; }

    /// Longest root-to-leaf path, counted in edges.
    int depth() const;
    std::size_t leaf_count() const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    void set_leaf_value(std::size_t node, double value) { nodes_.at(node).value = value; }

private:
    std::vector<TreeNode> nodes_;
};

struct TreeParams {
    int max_depth = 5;
    int min_samples_leaf = 1;
};

/// Greedy variance-reduction regression tree on `samples.targets()`.
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values of each feature; equal gains resolve to the lowest feature index,
/// then the smallest threshold. Leaves carry the mean target.
RegressionTree fit_tree(const SampleSet& samples, const TreeParams& params);

double initial_prediction(std::span<const double> targets, const Loss& loss);

std::vector<double> negative_gradient(const Loss& loss, std::span<const double> targets,
                                      std::span<const double> predictions);

/// Terminal value for one leaf. Squared loss: mean residual. Quantile loss:
/// percentile of (target - prediction) over the leaf's rows.
double leaf_value(const Loss& loss, std::span<const double> residuals,
                  std::span<const double> targets, std::span<const double> predictions);

/// Additive tree ensemble: F(x) = f0 + learning_rate * sum_i tree_i(x).
/// Immutable after fit; safe to share across threads.
class BoostedModel {
public:
    BoostedModel(double f0, std::vector<RegressionTree> trees, BoostConfig config,
                 std::size_t n_features);

    double predict(std::span<const double> row) const;

    /// Prediction using only the first `n_trees` trees.
    double predict_prefix(std::span<const double> row, std::size_t n_trees) const;

    double f0() const noexcept { return f0_; }
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    const BoostConfig& config() const noexcept { return config_; }
    std::size_t n_features() const noexcept { return n_features_; }

private:
    void check_arity(std::span<const double> row) const;

    double f0_;
    std::vector<RegressionTree> trees_;
    BoostConfig config_;
    std::size_t n_features_;
};

BoostedModel fit(const SampleSet& samples, const BoostConfig& config);

inline double predict(const BoostedModel& model, std::span<const double> row) {
    return model.predict(row);
}

/// Current model document version written by to_json().
constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const BoostedModel& model);
/// Throws InvalidInput on an unknown format version or malformed document.
BoostedModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const BoostConfig& config);
BoostConfig config_from_json(const nlohmann::json& doc);

} // namespace loadcast::gbrt
