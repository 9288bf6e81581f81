#pragma once

// Bayesian-learning-rule driver: lambda_i <- (1 - rho) lambda_i + rho grad_{mu_i} E_q[log p].
// For conjugate nodes the gradient is the read-off coefficient supplied by the model.

#include "vbr/expfam.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vbr {

enum class NodeRole { Local, Global };

/// One latent node. `mu()` is always nat_to_mean(lambda()).
class NodeState {
public:
  /// delta_mode is only accepted for Gaussian nodes.
  NodeState(std::string id, NaturalParam lambda, NodeRole role, bool delta_mode = false);

  [[nodiscard]] const std::string &id() const noexcept { return id_; }
  [[nodiscard]] const FamilyDescriptor &family() const noexcept { return lambda_.family(); }
  [[nodiscard]] const NaturalParam &lambda() const noexcept { return lambda_; }
  [[nodiscard]] const ExpectationParam &mu() const noexcept { return mu_; }
  [[nodiscard]] bool delta_mode() const noexcept { return delta_mode_; }
  [[nodiscard]] NodeRole role() const noexcept { return role_; }

  void set_lambda(NaturalParam lambda);

private:
  std::string id_;
  NaturalParam lambda_;
  ExpectationParam mu_;
  NodeRole role_;
  bool delta_mode_;
};

using State = std::vector<NodeState>;

/// Moments handed to coefficient providers: node mu, or its delta moment when flagged.
using MeanSnapshot = std::vector<ExpectationParam>;

class CoefficientProvider {
public:
  virtual ~CoefficientProvider() = default;

  /// grad_{mu_i} E_q[log p(y, z)] at `moments`, laid out like node i's natural parameter.
  [[nodiscard]] virtual Vector coefficient(std::size_t node, const MeanSnapshot &moments) const = 0;

  /// E_q[log p(y, z)] including every additive constant.
  [[nodiscard]] virtual double expected_log_joint(const MeanSnapshot &moments) const = 0;

  /// grad_{mu_i} E_q[log h_i(z_i)] for nodes whose family has a non-constant base measure.
  [[nodiscard]] virtual std::optional<Vector> base_measure_grad(std::size_t /*node*/) const {
    return std::nullopt;
  }

  /// False when coefficient(i) depends on mu_i itself.
  [[nodiscard]] virtual bool is_conjugate(std::size_t /*node*/) const { return true; }
};

struct ModelSpec {
  std::string name;
  std::shared_ptr<const CoefficientProvider> provider;
  State initial;
  /// Empty means locals in index order, then globals.
  std::vector<std::size_t> sweep_order;
};

enum class ScheduleKind { CAVI, SVI, ParallelBLR };

/// rho_t = (t + tau)^-kappa with kappa in (0.5, 1], tau >= 0.
struct RateSchedule {
  double kappa = 0.7;
  double tau = 1.0;

  void validate() const;
  [[nodiscard]] double operator()(std::size_t t) const;
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::CAVI;
  /// Rate for every node under ParallelBLR. CAVI and SVI locals always use 1.
  double rho_local = 1.0;
  RateSchedule global_rate;
  /// Explicit node order for CAVI sweeps; overrides the model default.
  std::vector<std::size_t> order;
  /// When set, CAVI sweeps visit nodes in a fresh random permutation each sweep.
  std::optional<std::uint64_t> shuffle_seed;
  /// Seed for SVI local-node sampling.
  std::uint64_t seed = 0;
  /// Worker threads for ParallelBLR coefficient evaluation.
  unsigned threads = 1;

  void validate() const;
};

struct FitOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  bool keep_states = false;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double elbo = 0.0;
  double residual = 0.0;
  double wall_seconds = 0.0;
};

struct FitTrace {
  std::vector<IterationRecord> records;
  /// Per-iteration states when FitOptions::keep_states is set (index matches records).
  std::vector<State> states;
  State final_state;
  bool converged = false;
};

/// (m, m m^T) for a delta-flagged Gaussian node.
ExpectationParam delta_moment(const NodeState &node);

MeanSnapshot effective_moments(const State &state);

/// New node with lambda = (1 - rho) lambda + rho (g - base_grad). Throws DomainError if
/// the result leaves the family domain.
NodeState blr_step(const NodeState &node, const Vector &g, double rho,
                   const std::optional<Vector> &base_grad = std::nullopt);

/// blr_step that halves rho (at most 10 times) while the step leaves the domain.
NodeState damped_step(const NodeState &node, const Vector &g, double rho,
                      const std::optional<Vector> &base_grad = std::nullopt);

std::vector<std::size_t> default_sweep_order(const ModelSpec &model, const State &state);

/// One coordinate-wise pass with rho = 1, each node seeing the freshest moments.
State cavi_sweep(const ModelSpec &model, State state,
                 const std::vector<std::size_t> &order = {});

/// All nodes updated from one frozen snapshot with a shared rate.
State parallel_blr_step(const ModelSpec &model, const State &state, double rho,
                        unsigned threads = 1);

/// Full local update of node `local`, then a damped global update at rate rho_t.
State svi_step(const ModelSpec &model, State state, std::size_t local, double rho_t);

double elbo(const ModelSpec &model, const State &state);

/// max_i || lambda_i - (coefficient_i - base_grad_i) ||_inf
double fixed_point_residual(const ModelSpec &model, const State &state);

FitTrace fit(const ModelSpec &model, const Schedule &schedule, const FitOptions &options = {});
FitTrace fit(const ModelSpec &model, State initial, const Schedule &schedule,
             const FitOptions &options = {});

} // namespace vbr
