#include "lesiontrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "euclidean") return DistanceKind::Euclidean;
  if (name == "geodesic") return DistanceKind::Geodesic;
  fail(ErrorKind::InvalidConfig, "unknown distance kind '" + name + "' (expected euclidean|geodesic)");
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "auto") return SolverKind::Auto;
  if (name == "hungarian") return SolverKind::Hungarian;
  if (name == "spectral") return SolverKind::Spectral;
  if (name == "brute_force") return SolverKind::BruteForce;
  fail(ErrorKind::InvalidConfig, "unknown solver '" + name + "' (expected auto|hungarian|spectral|brute_force)");
}

const char* to_string(DistanceKind kind) { return kind == DistanceKind::Euclidean ? "euclidean" : "geodesic"; }

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Auto: return "auto";
    case SolverKind::Hungarian: return "hungarian";
    case SolverKind::Spectral: return "spectral";
    case SolverKind::BruteForce: return "brute_force";
  }
  return "?";
}

void MatchConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidConfig, "alpha must lie in [0,1], got " + std::to_string(alpha));
  if (!(dummy_unary_cost >= 0.0) || !std::isfinite(dummy_unary_cost)) {
    fail(ErrorKind::InvalidConfig, "dummy unary cost must be finite and >= 0");
  }
  if (!(dummy_binary_cost >= 0.0) || !std::isfinite(dummy_binary_cost)) {
    fail(ErrorKind::InvalidConfig, "dummy binary cost must be finite and >= 0");
  }
  if (local_search_passes < 0) fail(ErrorKind::InvalidConfig, "local search passes must be >= 0");
}

nlohmann::json to_json(const MatchConfig& c) {
  return {{"alpha", c.alpha},
          {"distance", to_string(c.distance_kind)},
          {"dummy_unary_cost", c.dummy_unary_cost},
          {"dummy_binary_cost", c.dummy_binary_cost},
          {"solver", to_string(c.solver)},
          {"geodesic_method", to_string(c.geodesic_method)},
          {"normalize_by_diameter", c.normalize_by_diameter},
          {"local_search_passes", c.local_search_passes}};
}

void check_feasible(const Assignment& a, int num_sources, int num_targets) {
  if (static_cast<int>(a.target.size()) != num_sources || a.num_targets != num_targets) {
    fail(ErrorKind::InfeasibleAssignment, "assignment is " + std::to_string(a.target.size()) + "x" +
                                              std::to_string(a.num_targets) + ", costs are " +
                                              std::to_string(num_sources) + "x" + std::to_string(num_targets));
  }
  std::vector<int> owner(num_targets, -1);
  for (int i = 0; i < num_sources; ++i) {
    const int t = a.target[i];
    if (t == Assignment::kDummy) continue;
    if (t < 0 || t >= num_targets) {
      fail(ErrorKind::InfeasibleAssignment, "source " + std::to_string(i) + " -> target " + std::to_string(t));
    }
    if (owner[t] >= 0) {
      fail(ErrorKind::InfeasibleAssignment, "target " + std::to_string(t) + " taken by sources " +
                                                std::to_string(owner[t]) + " and " + std::to_string(i));
    }
    owner[t] = i;
  }
}

MatchResult make_result(const Assignment& assignment, const LossTerms& terms, SolverKind solver,
                        const MatchConfig& config) {
  MatchResult r;
  for (std::size_t i = 0; i < assignment.target.size(); ++i) {
    const int t = assignment.target[i];
    if (t == Assignment::kDummy) {
      r.disappearing.push_back(static_cast<int>(i));
    } else {
      r.pairs.emplace_back(static_cast<int>(i), t);
    }
  }
  r.appearing = assignment.appearing();
  r.loss = terms.loss;
  r.unary_term = terms.unary;
  r.binary_term = terms.binary;
  r.solver_used = solver;
  r.assignment = assignment;
  r.config = config;
  return r;
}

nlohmann::json to_json(const MatchResult& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [i, m] : r.pairs) pairs.push_back({i, m});
  auto cfg = to_json(r.config);
  cfg["solver_used"] = to_string(r.solver_used);
  return {{"pairs", pairs},
          {"disappearing", r.disappearing},
          {"appearing", r.appearing},
          {"loss", r.loss},
          {"unary", r.unary_term},
          {"binary", r.binary_term},
          {"config", cfg}};
}

MatchResult match_result_from_json(const nlohmann::json& j) {
  MatchResult r;
  try {
    for (const auto& p : j.at("pairs")) r.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    r.disappearing = j.at("disappearing").get<std::vector<int>>();
    r.appearing = j.at("appearing").get<std::vector<int>>();
    r.loss = j.value("loss", 0.0);
    r.unary_term = j.value("unary", 0.0);
    r.binary_term = j.value("binary", 0.0);
    if (j.contains("config")) {
      const auto& c = j["config"];
      r.config.alpha = c.value("alpha", r.config.alpha);
      r.config.distance_kind = parse_distance_kind(c.value("distance", std::string("geodesic")));
      r.config.dummy_unary_cost = c.value("dummy_unary_cost", r.config.dummy_unary_cost);
      r.config.dummy_binary_cost = c.value("dummy_binary_cost", r.config.dummy_binary_cost);
      r.config.solver = parse_solver_kind(c.value("solver", std::string("auto")));
      r.config.normalize_by_diameter = c.value("normalize_by_diameter", false);
      r.solver_used = parse_solver_kind(c.value("solver_used", std::string("auto")));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("match result: ") + e.what());
  }
  const int n = static_cast<int>(r.pairs.size() + r.disappearing.size());
  const int m = static_cast<int>(r.pairs.size() + r.appearing.size());
  r.assignment = {std::vector<int>(n, Assignment::kDummy), m};
  for (const auto& [i, t] : r.pairs) {
    if (i < 0 || i >= n || t < 0 || t >= m) fail(ErrorKind::Schema, "match result pair out of range");
    r.assignment.target[i] = t;
  }
  return r;
}

Eigen::MatrixXd extend_with_dummy(const Eigen::MatrixXd& pairwise, double c) {
  const Eigen::Index k = pairwise.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(k + 1, k + 1, c);
  out.topLeftCorner(k, k) = pairwise;
  out(k, k) = 0.0;
  return out;
}

namespace {

Eigen::MatrixXd euclidean_pairwise(const Vertices& p) {
  const Eigen::Index k = p.rows();
  Eigen::MatrixXd d(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  }
  return d;
}

// Target-mesh vertex each source lesion corresponds to.
std::vector<int> corresponded_vertices(const LesionSet3D& source, const CorrespondenceMap& corr,
                                       Eigen::Index target_vertices) {
  std::vector<int> out;
  out.reserve(source.size());
  for (const auto& l : source.lesions) {
    if (l.vertex < 0 || static_cast<std::size_t>(l.vertex) >= corr.size()) {
      fail(ErrorKind::MeshMismatch, "lesion vertex " + std::to_string(l.vertex) + " outside correspondence");
    }
    const int t = corr[l.vertex];
    if (t < 0 || t >= target_vertices) fail(ErrorKind::MeshMismatch, "correspondence target " + std::to_string(t));
    out.push_back(t);
  }
  return out;
}

// Real-block lesion distances, n x m.
Eigen::MatrixXd unary_block(const LesionSet3D& source, const LesionSet3D& target, const CorrespondenceMap* corr,
                            const TexturedMesh* target_mesh, const GeodesicSolver* target_solver, DistanceKind kind,
                            const PairwiseOptions& geodesic) {
  const auto n = static_cast<Eigen::Index>(source.size());
  const auto m = static_cast<Eigen::Index>(target.size());
  Eigen::MatrixXd u(n, m);
  if (kind == DistanceKind::Euclidean) {
    // Raw scan coordinates; the correspondence is not consulted.
    const Vertices from = source.positions();
    const Vertices to = target.positions();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) u(i, j) = (from.row(i) - to.row(j)).norm();
    }
    return u;
  }
  if (corr == nullptr) fail(ErrorKind::MissingCorrespondence, "geodesic unary costs need a vertex correspondence");
  if (target_mesh == nullptr) fail(ErrorKind::MissingCorrespondence, "geodesic unary costs need the target mesh");
  const auto mapped = corresponded_vertices(source, *corr, target_mesh->num_vertices());
  if (n == 0 || m == 0) return u;
  const auto targets = target.vertex_indices();
  for (const int v : targets) {
    if (v < 0 || v >= target_mesh->num_vertices()) fail(ErrorKind::InvalidVertex, "target lesion vertex " + std::to_string(v));
  }
  const auto& comp = target_solver->components();
  const auto fields = target_solver->fields(targets, geodesic.method);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = fields[j].distance[mapped[i]];
      if (!std::isfinite(d) && !geodesic.permissive) {
        fail(ErrorKind::DisconnectedLesions, "mapped source lesion " + std::to_string(i) + " (vertex " +
                                                 std::to_string(mapped[i]) + ", component " +
                                                 std::to_string(comp[mapped[i]]) + ") cannot reach target lesion " +
                                                 std::to_string(j) + " (vertex " + std::to_string(targets[j]) +
                                                 ", component " + std::to_string(comp[targets[j]]) + ")");
      }
      u(i, j) = d;
    }
  }
  return u;
}

Eigen::MatrixXd extend_unary(const Eigen::MatrixXd& block, double c_u) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(block.rows() + 1, block.cols() + 1, c_u);
  out.topLeftCorner(block.rows(), block.cols()) = block;
  out(block.rows(), block.cols()) = 0.0;
  return out;
}

Eigen::MatrixXd pairwise_block(const GeodesicSolver* solver, const LesionSet3D& lesions, DistanceKind kind,
                               const PairwiseOptions& geodesic) {
  if (kind == DistanceKind::Euclidean || lesions.empty()) return euclidean_pairwise(lesions.positions());
  return pairwise_matrix(*solver, lesions.vertex_indices(), geodesic);
}

void check_dims(const Eigen::MatrixXd& unary, const Eigen::MatrixXd& ds, const Eigen::MatrixXd& dt) {
  if (unary.rows() < 1 || unary.cols() < 1 || ds.rows() != unary.rows() || ds.cols() != unary.rows() ||
      dt.rows() != unary.cols() || dt.cols() != unary.cols()) {
    fail(ErrorKind::InvalidConfig, "cost matrices disagree: unary " + std::to_string(unary.rows()) + "x" +
                                       std::to_string(unary.cols()) + ", source " + std::to_string(ds.rows()) +
                                       "x" + std::to_string(ds.cols()) + ", target " + std::to_string(dt.rows()) +
                                       "x" + std::to_string(dt.cols()));
  }
}

LossTerms loss_unchecked(const Assignment& a, const Eigen::MatrixXd& unary, const Eigen::MatrixXd& ds,
                         const Eigen::MatrixXd& dt, double alpha) {
  const int n = static_cast<int>(unary.rows()) - 1;
  const int m = static_cast<int>(unary.cols()) - 1;
  const auto col = [&](int i) { return a.target[i] == Assignment::kDummy ? m : a.target[i]; };
  LossTerms t;
  for (int i = 0; i < n; ++i) t.unary += unary(i, col(i));
  for (const int j : a.appearing()) t.unary += unary(n, j);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) t.binary += std::abs(ds(i, k) - dt(col(i), col(k)));
  }
  t.loss = alpha * t.unary + (1.0 - alpha) * t.binary;
  return t;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 1.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) med = 0.5 * (med + *std::max_element(v.begin(), mid));
  return med > 0 ? med : 1.0;
}

double clamp_finite(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::max() / 4; }

}  // namespace

Eigen::MatrixXd unary_costs(const LesionSet3D& source, const LesionSet3D& target, const CorrespondenceMap* corr,
                            const TexturedMesh* target_mesh, DistanceKind kind, double c_u,
                            const PairwiseOptions& geodesic) {
  std::optional<GeodesicSolver> solver;
  if (kind == DistanceKind::Geodesic && target_mesh != nullptr && corr != nullptr) solver.emplace(*target_mesh);
  return extend_unary(unary_block(source, target, corr, target_mesh, solver ? &*solver : nullptr, kind, geodesic), c_u);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> binary_distance_matrices(const TexturedMesh& source_mesh,
                                                                     const LesionSet3D& source,
                                                                     const TexturedMesh& target_mesh,
                                                                     const LesionSet3D& target, double c_b,
                                                                     DistanceKind kind,
                                                                     const PairwiseOptions& geodesic) {
  std::optional<GeodesicSolver> s, t;
  if (kind == DistanceKind::Geodesic) {
    s.emplace(source_mesh);
    t.emplace(target_mesh);
  }
  return {extend_with_dummy(pairwise_block(s ? &*s : nullptr, source, kind, geodesic), c_b),
          extend_with_dummy(pairwise_block(t ? &*t : nullptr, target, kind, geodesic), c_b)};
}

LossTerms evaluate_loss(const Assignment& assignment, const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                        const Eigen::MatrixXd& d_target, double alpha) {
  check_dims(unary, d_source, d_target);
  check_feasible(assignment, static_cast<int>(unary.rows()) - 1, static_cast<int>(unary.cols()) - 1);
  return loss_unchecked(assignment, unary, d_source, d_target, alpha);
}

Assignment solve_unary(const Eigen::MatrixXd& unary) { return solve_with_dummies(unary); }

Assignment solve_brute_force(const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                             const Eigen::MatrixXd& d_target, double alpha) {
  check_dims(unary, d_source, d_target);
  const int n = static_cast<int>(unary.rows()) - 1;
  const int m = static_cast<int>(unary.cols()) - 1;
  Assignment best;
  double best_loss = 0;
  bool have = false;
  enumerate_assignments(n, m, [&](const Assignment& a) {
    const double l = loss_unchecked(a, unary, d_source, d_target, alpha).loss;
    if (!have || l < best_loss) {
      have = true;
      best_loss = l;
      best = a;
    }
  });
  return best;
}

Assignment local_search(Assignment a, const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                        const Eigen::MatrixXd& d_target, double alpha, int passes) {
  check_dims(unary, d_source, d_target);
  const int n = static_cast<int>(unary.rows()) - 1;
  const int m = static_cast<int>(unary.cols()) - 1;
  check_feasible(a, n, m);
  double current = loss_unchecked(a, unary, d_source, d_target, alpha).loss;
  // Require a margin so floating-point noise cannot cycle.
  const auto improves = [&](double candidate) { return candidate < current - 1e-12 * (1.0 + std::abs(current)); };

  std::vector<int> owner(m, -1);
  for (int i = 0; i < n; ++i) {
    if (a.target[i] >= 0) owner[a.target[i]] = i;
  }
  for (int pass = 0; pass < passes; ++pass) {
    bool improved = false;
    // Reassign a source to the dummy or to an unused target.
    for (int i = 0; i < n; ++i) {
      for (int t = -1; t < m; ++t) {
        if (t == a.target[i] || (t >= 0 && owner[t] >= 0)) continue;
        const int old = a.target[i];
        a.target[i] = t;
        const double l = loss_unchecked(a, unary, d_source, d_target, alpha).loss;
        if (improves(l)) {
          if (old >= 0) owner[old] = -1;
          if (t >= 0) owner[t] = i;
          current = l;
          improved = true;
        } else {
          a.target[i] = old;
        }
      }
    }
    // Swap the targets of two sources.
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        if (a.target[i] == a.target[k]) continue;
        std::swap(a.target[i], a.target[k]);
        const double l = loss_unchecked(a, unary, d_source, d_target, alpha).loss;
        if (improves(l)) {
          if (a.target[i] >= 0) owner[a.target[i]] = i;
          if (a.target[k] >= 0) owner[a.target[k]] = k;
          current = l;
          improved = true;
        } else {
          std::swap(a.target[i], a.target[k]);
        }
      }
    }
    if (!improved) break;
  }
  return a;
}

Assignment solve_spectral(const Eigen::MatrixXd& unary, const Eigen::MatrixXd& d_source,
                          const Eigen::MatrixXd& d_target, double alpha, const SpectralOptions& options) {
  check_dims(unary, d_source, d_target);
  const int n = static_cast<int>(unary.rows()) - 1;
  const int m = static_cast<int>(unary.cols()) - 1;
  if (alpha >= 1.0) return solve_unary(unary);
  if (n == 0 || m == 0) return {std::vector<int>(n, Assignment::kDummy), m};

  // Candidate matches of real sources, the dummy target included.
  std::vector<std::pair<int, int>> cand;
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t <= m; ++t) cand.emplace_back(s, t);
  }
  const auto c = static_cast<Eigen::Index>(cand.size());
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(c, c);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> compatible(c, c);
  std::vector<double> nonzero;
  for (Eigen::Index a = 0; a < c; ++a) {
    const auto [s, t] = cand[a];
    cost(a, a) = alpha * clamp_finite(unary(s, t));
    compatible(a, a) = true;
    if (cost(a, a) > 0) nonzero.push_back(cost(a, a));
    for (Eigen::Index b = a + 1; b < c; ++b) {
      const auto [s2, t2] = cand[b];
      const bool ok = s != s2 && (t != t2 || t == m);
      compatible(a, b) = compatible(b, a) = ok;
      if (!ok) continue;
      const double v =
          (1.0 - alpha) * std::abs(clamp_finite(d_source(s, s2)) - clamp_finite(d_target(t, t2)));
      cost(a, b) = cost(b, a) = v;
      if (v > 0) nonzero.push_back(v);
    }
  }
  const double sigma = median_of(std::move(nonzero));
  Eigen::MatrixXd affinity = Eigen::MatrixXd::Zero(c, c);
  for (Eigen::Index a = 0; a < c; ++a) {
    for (Eigen::Index b = 0; b < c; ++b) {
      if (compatible(a, b)) affinity(a, b) = std::exp(-cost(a, b) / sigma);
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Constant(c, 1.0 / std::sqrt(static_cast<double>(c)));
  for (int it = 0; it < options.max_power_iterations; ++it) {
    Eigen::VectorXd next = affinity * x;
    const double norm = next.norm();
    if (norm == 0) break;
    next /= norm;
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < options.power_tolerance) break;
  }

  // Scores relative to the strongest candidate; every disappearance scores
  // `dummy_level` and unmatched targets are free.
  const double top = x.maxCoeff() > 0 ? x.maxCoeff() : 1.0;
  Eigen::MatrixXd soft = Eigen::MatrixXd::Zero(n + 1, m + 1);
  for (Eigen::Index a = 0; a < c; ++a) soft(cand[a].first, cand[a].second) = -x[a] / top;
  for (int s = 0; s < n; ++s) soft(s, m) = -options.dummy_level;
  const Assignment spectral = local_search(solve_with_dummies(soft), unary, d_source, d_target, alpha,
                                           options.local_search_passes);
  if (!options.unary_start) return spectral;
  const Assignment linear = local_search(solve_unary(unary), unary, d_source, d_target, alpha,
                                         options.local_search_passes);
  return loss_unchecked(linear, unary, d_source, d_target, alpha).loss <
                 loss_unchecked(spectral, unary, d_source, d_target, alpha).loss
             ? linear
             : spectral;
}

namespace {

double lesion_diameter(const Eigen::MatrixXd& pairwise) {
  double d = 0;
  for (Eigen::Index k = 0; k < pairwise.size(); ++k) {
    if (std::isfinite(pairwise.data()[k])) d = std::max(d, pairwise.data()[k]);
  }
  return d;
}

}  // namespace

MatchResult track(const TexturedMesh& source_mesh, const LesionSet3D& source, const TexturedMesh& target_mesh,
                  const LesionSet3D& target, const CorrespondenceMap* corr, const MatchConfig& config) {
  config.validate();
  const PairwiseOptions geodesic{config.geodesic_method, config.permissive_components};
  std::optional<GeodesicSolver> s_solver, t_solver;
  if (config.distance_kind == DistanceKind::Geodesic) {
    if (corr == nullptr) fail(ErrorKind::MissingCorrespondence, "geodesic tracking needs a vertex correspondence");
    s_solver.emplace(source_mesh);
    t_solver.emplace(target_mesh);
  }
  const GeodesicSolver* sp = s_solver ? &*s_solver : nullptr;
  const GeodesicSolver* tp = t_solver ? &*t_solver : nullptr;

  Eigen::MatrixXd u = unary_block(source, target, corr, &target_mesh, tp, config.distance_kind, geodesic);
  Eigen::MatrixXd ds = pairwise_block(sp, source, config.distance_kind, geodesic);
  Eigen::MatrixXd dt = pairwise_block(tp, target, config.distance_kind, geodesic);
  if (config.normalize_by_diameter) {
    const double diameter = lesion_diameter(ds);
    if (diameter > 0) {
      u /= diameter;
      ds /= diameter;
      dt /= diameter;
    }
  }
  const Eigen::MatrixXd unary = extend_unary(u, config.dummy_unary_cost);
  const Eigen::MatrixXd d_source = extend_with_dummy(ds, config.dummy_binary_cost);
  const Eigen::MatrixXd d_target = extend_with_dummy(dt, config.dummy_binary_cost);

  SolverKind solver = config.solver;
  if (solver == SolverKind::Auto) solver = config.alpha == 1.0 ? SolverKind::Hungarian : SolverKind::Spectral;
  Assignment a;
  switch (solver) {
    case SolverKind::Hungarian:
      a = solve_unary(unary);
      break;
    case SolverKind::BruteForce:
      a = solve_brute_force(unary, d_source, d_target, config.alpha);
      break;
    default:
      a = solve_spectral(unary, d_source, d_target, config.alpha,
                         SpectralOptions{200, 1e-10, config.local_search_passes});
      solver = SolverKind::Spectral;
      break;
  }
  return make_result(a, evaluate_loss(a, unary, d_source, d_target, config.alpha), solver, config);
}

}  // namespace lesiontrack
