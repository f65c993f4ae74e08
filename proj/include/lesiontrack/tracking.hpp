#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lesiontrack/assignment.hpp"
#include "lesiontrack/correspondence.hpp"
#include "lesiontrack/geodesics.hpp"
#include "lesiontrack/mesh.hpp"
#include "lesiontrack/uv_mapping.hpp"

namespace lesiontrack {

enum class DistanceKind { Euclidean, Geodesic };
enum class SolverKind { Auto, Hungarian, Spectral, BruteForce };

DistanceKind parse_distance_kind(const std::string& name);
SolverKind parse_solver_kind(const std::string& name);
const char* to_string(DistanceKind kind);
const char* to_string(SolverKind kind);

struct MatchConfig {
  double alpha = 0.5;
  DistanceKind distance_kind = DistanceKind::Geodesic;
  double dummy_unary_cost = 0.5;
  double dummy_binary_cost = 0.5;
  SolverKind solver = SolverKind::Auto;
  GeodesicMethod geodesic_method = GeodesicMethod::Dijkstra;
  /// Divide every distance by the largest lesion-pairwise distance on the
  /// source scan before dummy costs apply.
  bool normalize_by_diameter = false;
  /// Cross-component geodesics become +inf instead of an error.
  bool permissive_components = false;
  /// Improvement passes of the swap local search after spectral rounding.
  int local_search_passes = 1;

  void validate() const;
};

nlohmann::json to_json(const MatchConfig& config);

struct LossTerms {
  double loss = 0;
  double unary = 0;
  double binary = 0;
};

struct MatchResult {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> disappearing;
  std::vector<int> appearing;
  double loss = 0;
  double unary_term = 0;
  double binary_term = 0;
  SolverKind solver_used = SolverKind::Auto;
  Assignment assignment;
  MatchConfig config;
};

MatchResult make_result(const Assignment& assignment, const LossTerms& terms, SolverKind solver,
                        const MatchConfig& config);

nlohmann::json to_json(const MatchResult& result);
MatchResult match_result_from_json(const nlohmann::json& j);

/// (n+1) x (m+1) matrix of lesion-to-lesion costs with the dummy last; real
/// rows/columns meet the dummy at `c_u`, dummy-to-dummy is 0. Geodesic costs
/// measure, on the target mesh, the distance from the corresponded source
/// lesion to each target lesion; Euclidean costs compare raw scan coordinates.
Eigen::MatrixXd unary_costs(const LesionSet3D& source, const LesionSet3D& target, const CorrespondenceMap* corr,
                            const TexturedMesh* target_mesh, DistanceKind kind, double c_u,
                            const PairwiseOptions& geodesic = {});

/// Pairwise lesion distances within each scan, extended with a dummy
/// row/column at `c_b` (dummy diagonal 0).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> binary_distance_matrices(const TexturedMesh& source_mesh,
                                                                     const LesionSet3D& source,
                                                                     const TexturedMesh& target_mesh,
                                                                     const LesionSet3D& target, double c_b,
                                                                     DistanceKind kind = DistanceKind::Geodesic,
                                                                     const PairwiseOptions& geodesic = {});

/// Extends an m x m pairwise matrix with a dummy row/column of `c`.
Eigen::MatrixXd extend_with_dummy(const Eigen::MatrixXd& pairwise, double c);

/// alpha * unary + (1 - alpha) * binary for a dummy-extended assignment. The
/// unary term charges every source lesion its target cost and every appearing
/// lesion the dummy-row cost. The binary term sums |D_s[i][k] - D_t[a][b]|
/// once per pair of source lesions i < k, where a and b are their targets and
/// a disappearing lesion's target is the dummy.
LossTerms evaluate_loss(const Assignment& assignment, const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                        const Eigen::MatrixXd& d_target, double alpha);

/// Linear (unary-only) optimum through the padded Hungarian method.
Assignment solve_unary(const Eigen::MatrixXd& unary);

struct SpectralOptions {
  int max_power_iterations = 200;
  double power_tolerance = 1e-10;
  int local_search_passes = 1;
  /// Rounding score of a disappearance relative to the strongest candidate.
  double dummy_level = 0.2;
  /// Also climb from the unary-only optimum and keep the lower loss.
  bool unary_start = true;
};

/// Quadratic-assignment relaxation: leading eigenvector of the affinity
/// between candidate matches of source lesions (dummy target included),
/// Hungarian rounding of the soft assignment, then swap/reassign hill
/// climbing on the exact loss. A second climb starts from the unary-only
/// optimum; the lower loss wins, ties going to the spectral start.
Assignment solve_spectral(const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                          const Eigen::MatrixXd& d_target, double alpha, const SpectralOptions& options = {});

/// Exhaustive minimiser; ties resolve to the first assignment in enumeration order.
Assignment solve_brute_force(const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                             const Eigen::MatrixXd& d_target, double alpha);

/// Hill climbing over reassign/swap moves starting from `start`; stops after
/// `passes` sweeps or when a sweep finds no improvement.
Assignment local_search(Assignment start, const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                        const Eigen::MatrixXd& d_target, double alpha, int passes);

/// End-to-end lesion matching between two scans. `corr` is required for the
/// geodesic distance kind.
MatchResult track(const TexturedMesh& source_mesh, const LesionSet3D& source, const TexturedMesh& target_mesh,
                  const LesionSet3D& target, const CorrespondenceMap* corr, const MatchConfig& config);

}  // namespace lesiontrack
