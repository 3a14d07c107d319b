#include "viewfuse/loss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "viewfuse/errors.hpp"

namespace viewfuse {

void LossConfig::validate() const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("k must be >= 0");
    if (!(lambda_2d >= 0.0) || !std::isfinite(lambda_2d)) throw DomainError("lambda_2d must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1e-3)) throw DomainError("epsilon must lie in (0, 1e-3)");
}

void PredictionSet::validate() const {
    const auto n = static_cast<std::size_t>(probs.rows());
    if (instance_id.size() != n || label.size() != n)
        throw DimensionMismatchError("prediction count " + std::to_string(n) +
                                     " does not match mesh vertex count " +
                                     std::to_string(instance_id.size()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const double a = probs(i, 0), b = probs(i, 1);
        if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0) || std::abs(a + b - 1.0) > 1e-6)
            throw DomainError("vertex " + std::to_string(i) + " probabilities are not a distribution");
        if (label[i] > 1) throw DomainError("labels must be 0 or 1");
    }
}

PredictionSet make_prediction_set(const LabeledMesh& mesh,
                                  const Eigen::Matrix<double, Eigen::Dynamic, 2>& probs) {
    if (static_cast<std::size_t>(probs.rows()) != mesh.vertices.size())
        throw DimensionMismatchError("prediction count " + std::to_string(probs.rows()) +
                                     " does not match mesh vertex count " +
                                     std::to_string(mesh.vertices.size()));
    return {probs, mesh.instance_id, mesh.clutter};
}

double instance_weight(double n, double median, double k) {
    if (!(n > 0.0)) throw DomainError("instance vertex count must be positive");
    if (!(median > 0.0)) throw DomainError("median vertex count must be positive");
    if (!(k >= 0.0)) throw DomainError("k must be >= 0");
    if (k == 0.0) return 1.0;
    return std::pow(median / n, k);
}

LossResult area_sensitive_ce(const PredictionSet& preds, const LossConfig& cfg) {
    cfg.validate();
    preds.validate();
    const auto nv = preds.probs.rows();
    if (nv == 0) throw EmptyInputError("area_sensitive_ce: no vertices");

    // Per-instance sums of log-likelihood, accumulated in vertex order.
    struct Acc {
        VertexClass cls;
        long count = 0;
        double log_likelihood = 0.0;
    };
    std::map<int, Acc> acc;
    for (Eigen::Index j = 0; j < nv; ++j) {
        const int y = preds.label[j];
        const double p = std::clamp(preds.probs(j, y), cfg.epsilon, 1.0 - cfg.epsilon);
        auto& a = acc[preds.instance_id[j]];
        a.cls = static_cast<VertexClass>(y);
        ++a.count;
        a.log_likelihood += std::log(p);
    }
    std::vector<long> counts;
    counts.reserve(acc.size());
    for (const auto& [id, a] : acc) counts.push_back(a.count);

    LossResult r;
    r.median_count = lower_median(counts);
    r.loss = 0.0;
    for (const auto& [id, a] : acc) {
        InstanceLoss il;
        il.instance_id = id;
        il.cls = a.cls;
        il.vertex_count = a.count;
        il.weight = instance_weight(static_cast<double>(a.count), static_cast<double>(r.median_count), cfg.k);
        il.contribution = -il.weight * a.log_likelihood / static_cast<double>(nv);
        r.loss += il.contribution;
        r.per_instance.push_back(il);
    }
    return r;
}

double combined_loss(double loss_3d, double loss_2d, const LossConfig& cfg) {
    if (!std::isfinite(loss_3d) || !std::isfinite(loss_2d))
        throw DomainError("combined_loss: inputs must be finite");
    if (!(cfg.lambda_2d >= 0.0)) throw DomainError("lambda_2d must be >= 0");
    return loss_3d + cfg.lambda_2d * loss_2d;
}

}  // namespace viewfuse
