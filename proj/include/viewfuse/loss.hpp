#pragma once

#include <Eigen/Core>

#include <vector>

#include "viewfuse/mesh.hpp"

namespace viewfuse {

struct LossConfig {
    double k = 1.0;           ///< modulating factor
    double lambda_2d = 0.3;   ///< weight of the 2D term in the combined loss
    double epsilon = 1e-12;   ///< probability clamp

    void validate() const;
};

/// Per-vertex class probabilities bound to a labeled mesh. Column 0 is
/// non-clutter, column 1 is clutter. The ground truth is the mesh's own
/// clutter flag, so y is one-hot by construction. How the probabilities were
/// produced (softmax or otherwise) is up to the caller.
struct PredictionSet {
    Eigen::Matrix<double, Eigen::Dynamic, 2> probs;
    std::vector<int> instance_id;
    std::vector<std::uint8_t> label;

    /// Throws DimensionMismatchError when sizes disagree and DomainError when a
    /// row is not a probability distribution (tolerance 1e-6).
    void validate() const;
};

PredictionSet make_prediction_set(const LabeledMesh& mesh,
                                  const Eigen::Matrix<double, Eigen::Dynamic, 2>& probs);

/// (median / n)^k. Throws DomainError for n <= 0, median <= 0 or k < 0.
double instance_weight(double n, double median, double k);

struct InstanceLoss {
    int instance_id;
    VertexClass cls;
    long vertex_count;
    double weight;
    double contribution;  ///< this instance's share of the total loss
    double mean_contribution() const { return contribution / static_cast<double>(vertex_count); }
};

struct LossResult {
    double loss;
    long median_count;
    std::vector<InstanceLoss> per_instance;  ///< sorted by instance id
};

/// Instance-weighted cross entropy
///   loss = -(1/N_v) * sum_i w_i * sum_{j in V_i} log(clamp(p_{y_j, j}))
/// with w_i = (median(N)/n_i)^k over the scene's instance vertex counts.
/// k = 0 gives the ordinary mean cross entropy.
LossResult area_sensitive_ce(const PredictionSet& preds, const LossConfig& cfg);

/// loss_3d + lambda_2d * loss_2d. Throws DomainError on non-finite input.
double combined_loss(double loss_3d, double loss_2d, const LossConfig& cfg);

}  // namespace viewfuse
