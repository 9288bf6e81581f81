#include "vbr/engine.hpp"

#include "vbr/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace vbr {

namespace {

void check_model(const ModelSpec &model, const State &state) {
  if (!model.provider) {
    throw ConfigError("model '" + model.name + "' has no coefficient provider");
  }
  if (!model.initial.empty() && state.size() != model.initial.size()) {
    throw ConfigError("state has " + std::to_string(state.size()) + " nodes, model '" + model.name +
                      "' expects " + std::to_string(model.initial.size()));
  }
}

std::size_t single_global(const State &state) {
  std::optional<std::size_t> global;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].role() == NodeRole::Global) {
      if (global) {
        throw ConfigError("SVI requires exactly one global node");
      }
      global = i;
    }
  }
  if (!global) {
    throw ConfigError("SVI requires a designated global node");
  }
  return *global;
}

ExpectationParam effective_moment(const NodeState &node) {
  return node.delta_mode() ? delta_moment(node) : node.mu();
}

NodeState update_node(const ModelSpec &model, const NodeState &node, std::size_t index,
                      const MeanSnapshot &moments, double rho) {
  const Vector g = model.provider->coefficient(index, moments);
  return damped_step(node, g, rho, model.provider->base_measure_grad(index));
}

} // namespace

NodeState::NodeState(std::string id, NaturalParam lambda, NodeRole role, bool delta_mode)
    : id_(std::move(id)), lambda_(std::move(lambda)), mu_(nat_to_mean(lambda_)), role_(role),
      delta_mode_(delta_mode) {
  if (delta_mode_ && lambda_.family().kind != FamilyKind::Gaussian) {
    throw DomainError("delta mode is only defined for Gaussian nodes (node '" + id_ + "')");
  }
}

void NodeState::set_lambda(NaturalParam lambda) {
  if (!(lambda.family() == lambda_.family())) {
    throw DomainError("node '" + id_ + "' cannot change family from " + to_string(lambda_.family()) +
                      " to " + to_string(lambda.family()));
  }
  ExpectationParam mu = nat_to_mean(lambda);
  lambda_ = std::move(lambda);
  mu_ = std::move(mu);
}

void RateSchedule::validate() const {
  if (!(kappa > 0.5 && kappa <= 1.0)) {
    throw ConfigError("rate decay kappa must lie in (0.5, 1]");
  }
  if (!(tau >= 0.0)) {
    throw ConfigError("rate delay tau must be >= 0");
  }
}

double RateSchedule::operator()(std::size_t t) const {
  return std::min(1.0, std::pow(static_cast<double>(t) + tau, -kappa));
}

void Schedule::validate() const {
  if (!(rho_local > 0.0 && rho_local <= 1.0)) {
    throw ConfigError("learning rate rho must lie in (0, 1]");
  }
  if (kind == ScheduleKind::SVI) {
    global_rate.validate();
  }
  if (threads == 0) {
    throw ConfigError("thread count must be positive");
  }
}

ExpectationParam delta_moment(const NodeState &node) {
  if (node.family().kind != FamilyKind::Gaussian) {
    throw DomainError("delta moment requires a Gaussian node (node '" + node.id() + "')");
  }
  const int d = node.family().dim;
  const Vector m = node.mu().values().head(d);
  return {node.family(), gaussian_flatten(m, m * m.transpose())};
}

MeanSnapshot effective_moments(const State &state) {
  MeanSnapshot moments;
  moments.reserve(state.size());
  for (const auto &node : state) {
    moments.push_back(effective_moment(node));
  }
  return moments;
}

NodeState blr_step(const NodeState &node, const Vector &g, double rho,
                   const std::optional<Vector> &base_grad) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw DomainError("learning rate must lie in (0, 1]");
  }
  const Vector &lambda = node.lambda().values();
  if (g.size() != lambda.size() || (base_grad && base_grad->size() != lambda.size())) {
    throw DomainError("coefficient for node '" + node.id() + "' has the wrong shape");
  }
  Vector target = g;
  if (base_grad) {
    target -= *base_grad;
  }
  Vector next = rho == 1.0 ? target : Vector((1.0 - rho) * lambda + rho * target);
  NodeState out = node;
  try {
    out.set_lambda(NaturalParam(node.family(), std::move(next)));
  } catch (const DomainError &e) {
    throw DomainError("update of node '" + node.id() + "' left the " + to_string(node.family()) +
                      " domain: " + e.what());
  }
  return out;
}

NodeState damped_step(const NodeState &node, const Vector &g, double rho,
                      const std::optional<Vector> &base_grad) {
  constexpr int kMaxHalvings = 10;
  for (int k = 0;; ++k) {
    try {
      return blr_step(node, g, rho, base_grad);
    } catch (const DomainError &e) {
      if (k == kMaxHalvings) {
        throw;
      }
      spdlog::debug("{}; halving rho to {}", e.what(), 0.5 * rho);
      rho *= 0.5;
    }
  }
}

std::vector<std::size_t> default_sweep_order(const ModelSpec &model, const State &state) {
  if (!model.sweep_order.empty()) {
    return model.sweep_order;
  }
  std::vector<std::size_t> order;
  order.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].role() == NodeRole::Local) {
      order.push_back(i);
    }
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].role() == NodeRole::Global) {
      order.push_back(i);
    }
  }
  return order;
}

State cavi_sweep(const ModelSpec &model, State state, const std::vector<std::size_t> &order) {
  check_model(model, state);
  const auto visit = order.empty() ? default_sweep_order(model, state) : order;
  MeanSnapshot moments = effective_moments(state);
  for (std::size_t i : visit) {
    if (i >= state.size()) {
      throw ConfigError("sweep order names node " + std::to_string(i) + " outside the model");
    }
    if (!model.provider->is_conjugate(i) && !state[i].delta_mode()) {
      throw ConfigError("CAVI requires conjugate nodes; node '" + state[i].id() +
                        "' is non-conjugate (use a damped schedule)");
    }
    state[i] = update_node(model, state[i], i, moments, 1.0);
    moments[i] = effective_moment(state[i]);
  }
  return state;
}

State parallel_blr_step(const ModelSpec &model, const State &state, double rho, unsigned threads) {
  check_model(model, state);
  const MeanSnapshot frozen = effective_moments(state);
  State next = state;
  const std::size_t n = state.size();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      next[i] = update_node(model, state[i], i, frozen, rho);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    work(0, n);
    return next;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto &err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
  return next;
}

State svi_step(const ModelSpec &model, State state, std::size_t local, double rho_t) {
  check_model(model, state);
  const std::size_t global = single_global(state);
  if (local >= state.size() || state[local].role() != NodeRole::Local) {
    throw ConfigError("SVI local index " + std::to_string(local) + " is not a local node");
  }
  MeanSnapshot moments = effective_moments(state);
  state[local] = update_node(model, state[local], local, moments, 1.0);
  moments[local] = effective_moment(state[local]);
  state[global] = update_node(model, state[global], global, moments, rho_t);
  return state;
}

double elbo(const ModelSpec &model, const State &state) {
  check_model(model, state);
  double value = model.provider->expected_log_joint(effective_moments(state));
  for (const auto &node : state) {
    if (!node.delta_mode()) {
      value += entropy(node.lambda());
    }
  }
  return value;
}

double fixed_point_residual(const ModelSpec &model, const State &state) {
  check_model(model, state);
  const MeanSnapshot moments = effective_moments(state);
  double worst = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    Vector target = model.provider->coefficient(i, moments);
    if (auto base = model.provider->base_measure_grad(i)) {
      target -= *base;
    }
    worst = std::max(worst, (state[i].lambda().values() - target).cwiseAbs().maxCoeff());
  }
  return worst;
}

FitTrace fit(const ModelSpec &model, const Schedule &schedule, const FitOptions &options) {
  return fit(model, model.initial, schedule, options);
}

FitTrace fit(const ModelSpec &model, State initial, const Schedule &schedule,
             const FitOptions &options) {
  check_model(model, initial);
  schedule.validate();
  if (!(options.tol > 0.0)) {
    throw ConfigError("tolerance must be positive");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  FitTrace trace;
  State state = std::move(initial);
  auto record = [&](std::size_t iteration) {
    const double residual = fixed_point_residual(model, state);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    trace.records.push_back({iteration, elbo(model, state), residual, seconds});
    if (options.keep_states) {
      trace.states.push_back(state);
    }
    spdlog::debug("[{}] iter {} elbo {:.17g} residual {:.3e}", model.name, iteration,
                  trace.records.back().elbo, residual);
    return residual < options.tol;
  };

  std::vector<std::size_t> order = schedule.order.empty() ? default_sweep_order(model, state)
                                                          : schedule.order;
  std::mt19937_64 shuffle_rng(schedule.shuffle_seed.value_or(0));
  std::mt19937_64 svi_rng(schedule.seed);
  std::vector<std::size_t> locals;
  if (schedule.kind == ScheduleKind::SVI) {
    single_global(state);
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (state[i].role() == NodeRole::Local) {
        locals.push_back(i);
      }
    }
    if (locals.empty()) {
      throw ConfigError("SVI requires at least one local node");
    }
  }

  trace.converged = record(0);
  for (std::size_t it = 1; it <= options.max_iter && !trace.converged; ++it) {
    switch (schedule.kind) {
    case ScheduleKind::CAVI:
      if (schedule.shuffle_seed) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
      }
      state = cavi_sweep(model, std::move(state), order);
      break;
    case ScheduleKind::ParallelBLR:
      state = parallel_blr_step(model, state, schedule.rho_local, schedule.threads);
      break;
    case ScheduleKind::SVI: {
      std::uniform_int_distribution<std::size_t> pick(0, locals.size() - 1);
      const std::size_t local = locals[pick(svi_rng)];
      state = svi_step(model, std::move(state), local, schedule.global_rate(it - 1));
      break;
    }
    }
    trace.converged = record(it);
  }
  trace.final_state = std::move(state);
  return trace;
}

} // namespace vbr
