#include "lieddp/constraints.hpp"

#include <algorithm>
#include <limits>

namespace lieddp {

namespace {

constexpr double kFdStep = 1e-6;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Selected tangent rows for an avoidance constraint on a group of algebra
// dimension n. SE3 twists are [omega; v]; SO3 has rotation rows only.
std::pair<int, int> selected_range(AvoidanceComponents comp, int n) {
  switch (comp) {
    case AvoidanceComponents::Full:
      return {0, n};
    case AvoidanceComponents::Rotation:
      return {0, 3};
    case AvoidanceComponents::Position:
      return {3, 3};
  }
  return {0, n};
}

}  // namespace

double eval_velocity_bound(const VelocityBound& spec, const Eigen::VectorXd& xi) {
  require(spec.axis >= 0 && spec.axis < xi.size(),
          "eval_velocity_bound: axis out of range");
  const double x = xi[spec.axis];
  return spec.side == BoundSide::Upper ? x - spec.value : spec.value - x;
}

AvoidanceEval eval_config_avoidance(const ConfigAvoidance& spec,
                                    const GroupElement& X, bool clamp_log) {
  require(spec.center.group != nullptr && spec.center.group == X.group,
          "eval_config_avoidance: configuration and center on different groups");
  const LieGroup& g = *X.group;
  const int n = g.dim();
  const GroupElement rel = compose(g.inverse(X), spec.center);

  Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
  if (spec.components == AvoidanceComponents::Position &&
      spec.metric == PositionMetric::Euclidean) {
    // Body-frame displacement to the center; its norm is the workspace
    // distance because the rotation block is orthonormal.
    offset.segment(3, 3) = rel.matrix.topRightCorner(3, 1);
  } else if (spec.components == AvoidanceComponents::Rotation && n == 6) {
    const GroupElement rot{&so3(), rel.matrix.topLeftCorner(3, 3)};
    offset.head(3) = clamp_log ? so3().log_clamped(rot) : so3().log_map(rot);
  } else {
    const Eigen::VectorXd full =
        clamp_log ? g.log_clamped(rel) : g.log_map(rel);
    const auto [lo, len] = selected_range(spec.components, n);
    offset.segment(lo, len) = full.segment(lo, len);
  }

  AvoidanceEval out;
  out.offset = offset;
  if (spec.radii.size() > 0) {
    out.value = 1.0 - (offset.array() / spec.radii.array()).square().sum();
  } else {
    out.value = spec.radius * spec.radius - offset.squaredNorm();
  }
  return out;
}

Eigen::VectorXd eval_input_bound(const InputBound& spec, const Eigen::VectorXd& u) {
  require(u.size() == spec.lower.size() && u.size() == spec.upper.size(),
          "eval_input_bound: dimension mismatch");
  Eigen::VectorXd g(2 * u.size());
  g.head(u.size()) = u - spec.upper;
  g.tail(u.size()) = spec.lower - u;
  return g;
}

ConstraintStack::ConstraintStack(std::vector<ConstraintSpec> specs,
                                 const DynamicsModel& model, JacobianMode mode,
                                 bool clamp_log)
    : specs_(std::move(specs)), model_(&model), mode_(mode), clamp_log_(clamp_log) {
  const int n = model.group().dim();
  const int m = model.input_dim();
  int config_rows = 0, velocity_rows = 0, input_rows = 0;
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* c = std::get_if<ConfigAvoidance>(&spec)) {
      require(c->center.group == &model.group(),
              "ConstraintStack: avoidance center on the wrong group");
      if (c->radii.size() > 0) {
        require(c->radii.size() == n && (c->radii.array() > 0.0).all(),
                "ConstraintStack: per-axis radii must be n positive values");
      } else {
        require(c->radius > 0.0, "ConstraintStack: avoidance radius must be positive");
      }
      if (c->components != AvoidanceComponents::Full) {
        require(n == 6, "ConstraintStack: component selectors require SE3");
      }
      ++config_rows;
    } else if (const auto* v = std::get_if<VelocityBound>(&spec)) {
      require(v->axis >= 0 && v->axis < n, "ConstraintStack: bound axis out of range");
      ++velocity_rows;
    } else {
      const auto& b = std::get<InputBound>(spec);
      require(b.lower.size() == m && b.upper.size() == m,
              "ConstraintStack: input bound dimension mismatch");
      require((b.lower.array() <= b.upper.array()).all(),
              "ConstraintStack: input bound has lower > upper");
      input_rows += 2 * m;
    }
  }
  rows_state_ = config_rows + velocity_rows;
  rows_total_ = rows_state_ + input_rows;
}

Eigen::VectorXd ConstraintStack::stacked(const GroupElement& X,
                                         const Eigen::VectorXd& xi,
                                         const Eigen::VectorXd* u) const {
  Eigen::VectorXd g(u ? rows_total_ : rows_state_);
  int row = 0;
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* c = std::get_if<ConfigAvoidance>(&spec)) {
      g[row++] = eval_config_avoidance(*c, X, clamp_log_).value;
    }
  }
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* v = std::get_if<VelocityBound>(&spec)) {
      g[row++] = eval_velocity_bound(*v, xi);
    }
  }
  if (u) {
    for (const ConstraintSpec& spec : specs_) {
      if (const auto* b = std::get_if<InputBound>(&spec)) {
        g.segment(row, 2 * u->size()) = eval_input_bound(*b, *u);
        row += 2 * static_cast<int>(u->size());
      }
    }
  }
  return g;
}

Eigen::VectorXd ConstraintStack::values(const GroupElement& X,
                                        const Eigen::VectorXd& xi,
                                        const Eigen::VectorXd& u) const {
  return stacked(X, xi, &u);
}

Eigen::VectorXd ConstraintStack::terminal_values(const GroupElement& X,
                                                 const Eigen::VectorXd& xi) const {
  return stacked(X, xi, nullptr);
}

Eigen::MatrixXd ConstraintStack::numeric_jac_x(const GroupElement& X,
                                               const Eigen::VectorXd& xi,
                                               const Eigen::VectorXd* u) const {
  const LieGroup& g = model_->group();
  const int n = g.dim();
  const int p = u ? rows_total_ : rows_state_;
  Eigen::MatrixXd jac(p, 2 * n);
  Eigen::VectorXd basis = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    basis[i] = kFdStep;
    const GroupElement Xp = compose(X, g.exp_map(basis));
    const GroupElement Xm = compose(X, g.exp_map(-basis));
    jac.col(i) = (stacked(Xp, xi, u) - stacked(Xm, xi, u)) / (2.0 * kFdStep);
    basis[i] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xip = xi, xim = xi;
    xip[i] += kFdStep;
    xim[i] -= kFdStep;
    jac.col(n + i) = (stacked(X, xip, u) - stacked(X, xim, u)) / (2.0 * kFdStep);
  }
  return jac;
}

Eigen::MatrixXd ConstraintStack::numeric_jac_u(const GroupElement& X,
                                               const Eigen::VectorXd& xi,
                                               const Eigen::VectorXd& u) const {
  const int m = model_->input_dim();
  Eigen::MatrixXd jac(rows_total_, m);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd up = u, um = u;
    up[i] += kFdStep;
    um[i] -= kFdStep;
    jac.col(i) = (stacked(X, xi, &up) - stacked(X, xi, &um)) / (2.0 * kFdStep);
  }
  return jac;
}

Eigen::MatrixXd ConstraintStack::analytic_jac_x(const GroupElement& X,
                                                const Eigen::VectorXd& xi) const {
  const LieGroup& g = model_->group();
  const int n = g.dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows_total_, 2 * n);
  const Eigen::MatrixXd ad_xi = g.ad(xi);
  const LinearizedTwist lin = model_->linearize_twist(xi);
  int row = 0;
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* c = std::get_if<ConfigAvoidance>(&spec)) {
      const AvoidanceEval ev = eval_config_avoidance(*c, X, clamp_log_);
      Eigen::VectorXd sigma = ev.offset;
      if (c->radii.size() > 0) {
        sigma = (ev.offset.array() / c->radii.array().square()).matrix();
      }
      jac.row(row).head(n) = -2.0 * (ad_xi * sigma).transpose();
      jac.row(row).tail(n) = 2.0 * sigma.transpose();
      ++row;
    }
  }
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* v = std::get_if<VelocityBound>(&spec)) {
      const double beta = v->side == BoundSide::Upper ? -1.0 : 1.0;
      Eigen::VectorXd gap = Eigen::VectorXd::Zero(n);
      gap[v->axis] = v->value - xi[v->axis];
      jac.row(row).tail(n) = beta * (lin.twist_jacobian * gap).transpose();
      ++row;
    }
  }
  return jac;  // input rows stay zero in x
}

Eigen::MatrixXd ConstraintStack::analytic_jac_u(const Eigen::VectorXd& xi) const {
  const int n = model_->group().dim();
  const int m = model_->input_dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows_total_, m);
  const LinearizedTwist lin = model_->linearize_twist(xi);
  int row = 0;
  for (const ConstraintSpec& spec : specs_) {
    if (std::holds_alternative<ConfigAvoidance>(spec)) ++row;
  }
  for (const ConstraintSpec& spec : specs_) {
    if (const auto* v = std::get_if<VelocityBound>(&spec)) {
      const double beta = v->side == BoundSide::Upper ? -1.0 : 1.0;
      Eigen::VectorXd gap = Eigen::VectorXd::Zero(n);
      gap[v->axis] = v->value - xi[v->axis];
      jac.row(row) = beta * (lin.input_jacobian.transpose() * gap).transpose();
      ++row;
    }
  }
  for (const ConstraintSpec& spec : specs_) {
    if (std::holds_alternative<InputBound>(spec)) {
      jac.block(row, 0, m, m) = Eigen::MatrixXd::Identity(m, m);
      jac.block(row + m, 0, m, m) = -Eigen::MatrixXd::Identity(m, m);
      row += 2 * m;
    }
  }
  return jac;
}

ConstraintEval ConstraintStack::eval(const GroupElement& X,
                                     const Eigen::VectorXd& xi,
                                     const Eigen::VectorXd& u) const {
  ConstraintEval ev;
  ev.values = values(X, xi, u);
  if (mode_ == JacobianMode::Numeric) {
    ev.jac_x = numeric_jac_x(X, xi, &u);
    ev.jac_u = numeric_jac_u(X, xi, u);
  } else {
    ev.jac_x = analytic_jac_x(X, xi);
    ev.jac_u = analytic_jac_u(xi);
  }
  return ev;
}

ConstraintEval ConstraintStack::terminal_eval(const GroupElement& X,
                                              const Eigen::VectorXd& xi) const {
  ConstraintEval ev;
  ev.values = terminal_values(X, xi);
  if (mode_ == JacobianMode::Numeric) {
    ev.jac_x = numeric_jac_x(X, xi, nullptr);
  } else {
    ev.jac_x = analytic_jac_x(X, xi).topRows(rows_state_);
  }
  ev.jac_u = Eigen::MatrixXd::Zero(rows_state_, model_->input_dim());
  return ev;
}

Eigen::VectorXd penalty_diagonal(const Eigen::VectorXd& values,
                                 const MultiplierState& mult) {
  require(values.size() <= mult.mu.size(),
          "penalty_diagonal: more constraint values than penalty weights");
  Eigen::VectorXd diag(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    diag[i] = (values[i] < 0.0 && mult.lambda[i] == 0.0) ? 0.0 : mult.mu[i];
  }
  return diag;
}

MultiplierState update_multipliers(const MultiplierState& mult,
                                   std::span<const Eigen::VectorXd> step_values) {
  MultiplierState next = mult;
  const Eigen::Index p = mult.lambda.size();
  Eigen::VectorXd worst =
      Eigen::VectorXd::Constant(p, -std::numeric_limits<double>::infinity());
  for (const Eigen::VectorXd& g : step_values) {
    for (Eigen::Index i = 0; i < std::min(p, g.size()); ++i) {
      worst[i] = std::max(worst[i], g[i]);
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::isfinite(worst[i])) {
      next.lambda[i] = std::max(0.0, mult.lambda[i] + mult.mu[i] * worst[i]);
    }
  }
  next.mu = (mult.mu * mult.gamma).cwiseMin(mult.mu_max);
  return next;
}

}  // namespace lieddp
