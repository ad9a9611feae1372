#include "firstreply/mixed_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "firstreply/errors.hpp"

namespace firstreply {

const char* const kEngagementColumnNames[kEngagementCols] = {
    "intercept", "reply", "reply_sentiment", "reply_toxicity", "reply_attack"};

const char* to_string(CommunityType type) {
  return type == CommunityType::hateful ? "hateful" : "non-hateful";
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y*eta - log(1+exp(eta)), stable for large |eta|
double bernoulli_loglik(double eta, double y) {
  double log1pe = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
  return y * eta - log1pe;
}

struct GroupWork {
  double u = 0.0;        // current mode
  double loglik = 0.0;   // group data loglik at the mode
  double H = 0.0;        // sum of p(1-p)
  double S = 0.0;        // sum of p(1-p)(1-2p)
  Eigen::VectorXd sx;    // sum of s_i x_i
  Eigen::VectorXd wx;    // sum of w_i x_i
  Eigen::VectorXd score; // sum of (y_i - p_i) x_i
};

// Solves the group's penalized mode max_u sum_i loglik(x'beta + u) - u^2/(2s2)
// by 1-D Newton (concave problem). With sigma2 == 0 the mode is pinned at 0.
void solve_group_mode(const EngagementDesign& design, const Eigen::VectorXd& beta,
                      double sigma2, size_t g, GroupWork& work) {
  const Eigen::Index begin = design.offsets[g];
  const Eigen::Index end = design.offsets[g + 1];
  Eigen::VectorXd base = design.X.middleRows(begin, end - begin) * beta;

  double u = sigma2 > 0.0 ? work.u : 0.0;
  if (sigma2 > 0.0) {
    for (int it = 0; it < 200; ++it) {
      double grad = -u / sigma2;
      double hess = -1.0 / sigma2;
      for (Eigen::Index i = 0; i < base.size(); ++i) {
        double p = sigmoid(base[i] + u);
        grad += design.y[begin + i] - p;
        hess -= p * (1.0 - p);
      }
      double step = -grad / hess;
      // Newton on a concave 1-D function; damp big early steps
      if (std::abs(step) > 5.0) step = step > 0.0 ? 5.0 : -5.0;
      u += step;
      if (std::abs(step) < 1e-12) break;
    }
  }
  work.u = u;

  work.loglik = 0.0;
  work.H = 0.0;
  work.S = 0.0;
  const auto d = design.X.cols();
  work.sx = Eigen::VectorXd::Zero(d);
  work.wx = Eigen::VectorXd::Zero(d);
  work.score = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    double eta = base[i] + u;
    double p = sigmoid(eta);
    double w = p * (1.0 - p);
    double s = w * (1.0 - 2.0 * p);
    work.loglik += bernoulli_loglik(eta, design.y[begin + i]);
    work.H += w;
    work.S += s;
    work.sx += s * design.X.row(begin + i).transpose();
    work.wx += w * design.X.row(begin + i).transpose();
    work.score += (design.y[begin + i] - p) * design.X.row(begin + i).transpose();
  }
}

// Laplace objective given solved modes.
double objective_from_work(const std::vector<GroupWork>& work, double sigma2) {
  double G = 0.0;
  for (const auto& g : work) {
    G += g.loglik;
    if (sigma2 > 0.0) {
      G += -g.u * g.u / (2.0 * sigma2) - 0.5 * std::log1p(sigma2 * g.H);
    }
  }
  return G;
}

struct InnerState {
  Eigen::VectorXd beta;
  std::vector<GroupWork> work;
  double objective = -std::numeric_limits<double>::infinity();
  bool converged = false;
  size_t iterations = 0;
};

void check_separation(const Eigen::VectorXd& beta, double limit) {
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (std::abs(beta[k]) > limit) {
      throw ConvergenceError(std::string("complete separation suspected: |coefficient| > ") +
                             std::to_string(limit) + " for column " +
                             kEngagementColumnNames[k]);
    }
  }
}

double evaluate_objective(const EngagementDesign& design, const Eigen::VectorXd& beta,
                          double sigma2, std::vector<GroupWork>& work) {
  for (size_t g = 0; g < design.groups(); ++g) {
    solve_group_mode(design, beta, sigma2, g, work[g]);
  }
  return objective_from_work(work, sigma2);
}

// Maximizes the Laplace objective over beta at fixed sigma2 by Newton steps
// preconditioned with the penalized-information Schur complement, with a
// halving line search. The gradient includes the log-determinant term, so a
// finite-difference check of laplace_marginal_loglik vanishes at the optimum.
void fit_beta(const EngagementDesign& design, double sigma2, InnerState& state,
              const MixedFitOptions& options) {
  const auto d = design.X.cols();
  if (state.beta.size() != d) state.beta = Eigen::VectorXd::Zero(d);
  if (state.work.size() != design.groups()) state.work.assign(design.groups(), GroupWork());

  state.objective = evaluate_objective(design, state.beta, sigma2, state.work);
  state.converged = false;

  for (size_t iter = 0; iter < options.max_iterations; ++iter) {
    state.iterations = iter + 1;
    check_separation(state.beta, options.separation_limit);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
    // total-derivative gradient: data score plus the log-determinant term
    // through both beta and the implicit modes
    for (size_t g = 0; g < design.groups(); ++g) {
      const GroupWork& w = state.work[g];
      grad += w.score;
      if (sigma2 > 0.0) {
        double denom = w.H + 1.0 / sigma2;
        double kappa = sigma2 / (2.0 * (1.0 + sigma2 * w.H));
        grad -= kappa * (w.sx - (w.S / denom) * w.wx);
      }
    }
    // dense information: X'WX with W from current modes
    for (size_t g = 0; g < design.groups(); ++g) {
      const Eigen::Index begin = design.offsets[g];
      const Eigen::Index end = design.offsets[g + 1];
      Eigen::VectorXd base = design.X.middleRows(begin, end - begin) * state.beta;
      for (Eigen::Index i = 0; i < base.size(); ++i) {
        double p = sigmoid(base[i] + state.work[g].u);
        info.noalias() +=
            p * (1.0 - p) * design.X.row(begin + i).transpose() * design.X.row(begin + i);
      }
      if (sigma2 > 0.0) {
        const GroupWork& w = state.work[g];
        info.noalias() -= w.wx * w.wx.transpose() / (w.H + 1.0 / sigma2);
      }
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
      throw ConvergenceError("mixed model: information matrix not positive definite");
    }
    Eigen::VectorXd direction = ldlt.solve(grad);

    // line search on the Laplace objective
    double step = 1.0;
    bool improved = false;
    std::vector<GroupWork> trial_work = state.work;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd trial = state.beta + step * direction;
      double trial_obj = evaluate_objective(design, trial, sigma2, trial_work);
      if (std::isfinite(trial_obj) && trial_obj >= state.objective - 1e-13) {
        state.beta = trial;
        state.work = trial_work;
        state.objective = trial_obj;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;  // cannot improve further at floating-point resolution

    if ((step * direction).cwiseAbs().maxCoeff() < options.tol) {
      state.converged = true;
      break;
    }
  }
  check_separation(state.beta, options.separation_limit);
}

Eigen::MatrixXd penalized_information(const EngagementDesign& design, const InnerState& state,
                                      double sigma2) {
  const auto d = design.X.cols();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
  for (size_t g = 0; g < design.groups(); ++g) {
    const Eigen::Index begin = design.offsets[g];
    const Eigen::Index end = design.offsets[g + 1];
    Eigen::VectorXd base = design.X.middleRows(begin, end - begin) * state.beta;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      double p = sigmoid(base[i] + state.work[g].u);
      info.noalias() +=
          p * (1.0 - p) * design.X.row(begin + i).transpose() * design.X.row(begin + i);
    }
    if (sigma2 > 0.0) {
      const GroupWork& w = state.work[g];
      info.noalias() -= w.wx * w.wx.transpose() / (w.H + 1.0 / sigma2);
    }
  }
  return info;
}

}  // namespace

EngagementDesign build_engagement_design(std::vector<FirstPostEvent> events,
                                         const DesignOptions& options) {
  std::sort(events.begin(), events.end(), [](const FirstPostEvent& a, const FirstPostEvent& b) {
    if (a.community != b.community) return a.community < b.community;
    return a.user < b.user;
  });

  EngagementDesign design;
  const auto n = static_cast<Eigen::Index>(events.size());
  design.X.resize(n, kEngagementCols);
  design.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FirstPostEvent& ev = events[static_cast<size_t>(i)];
    if (design.group_names.empty() || design.group_names.back() != ev.community) {
      design.group_names.push_back(ev.community);
      design.offsets.push_back(i);
    }
    double reply = ev.treated ? 1.0 : 0.0;
    double s = 0.0, t = 0.0, a = 0.0;
    if (ev.treated && ev.first_reply) {
      s = ev.first_reply->sentiment;
      t = ev.first_reply->toxicity;
      a = ev.first_reply->attack;
      if (options.threshold_mode) {
        t = t >= options.threshold ? 1.0 : 0.0;
        a = a >= options.threshold ? 1.0 : 0.0;
      }
    }
    design.X(i, 0) = 1.0;
    design.X(i, 1) = reply;
    design.X(i, 2) = reply * s;
    design.X(i, 3) = reply * t;
    design.X(i, 4) = reply * a;
    design.y[i] = ev.engaged ? 1.0 : 0.0;
  }
  design.offsets.push_back(n);
  return design;
}

double laplace_marginal_loglik(const EngagementDesign& design, const Eigen::VectorXd& beta,
                               double sigma2) {
  std::vector<GroupWork> work(design.groups());
  return evaluate_objective(design, beta, sigma2, work);
}

EngagementModel fit_mixed_logistic(const EngagementDesign& design,
                                   const MixedFitOptions& options) {
  if (design.rows() == 0) throw DataError("mixed model: empty design");
  if (!options.pin_sigma2 && design.groups() < 2) {
    throw ConvergenceError(
        "mixed model: random-intercept variance unidentifiable with fewer than 2 "
        "communities; pin sigma2 to fit anyway");
  }
  // constant non-intercept columns make their coefficients unidentifiable
  for (Eigen::Index k = 1; k < design.X.cols(); ++k) {
    double lo = design.X.col(k).minCoeff();
    double hi = design.X.col(k).maxCoeff();
    if (lo == hi) {
      throw ConvergenceError(std::string("mixed model: column ") +
                             kEngagementColumnNames[k] +
                             " is constant; coefficient unidentifiable");
    }
  }

  InnerState state;
  EngagementModel model;

  if (options.pin_sigma2) {
    double sigma2 = *options.pin_sigma2;
    if (sigma2 < 0.0) throw DataError("mixed model: sigma2 must be nonnegative");
    fit_beta(design, sigma2, state, options);
    model.sigma2 = sigma2;
    model.converged = state.converged;
  } else {
    // golden-section on log sigma2; warm start across evaluations
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -10.0, hi = 5.0;
    auto eval = [&](double log_s2) {
      fit_beta(design, std::exp(log_s2), state, options);
      return state.objective;
    };
    double a = hi - phi * (hi - lo);
    double b = lo + phi * (hi - lo);
    double fa = eval(a);
    double fb = eval(b);
    for (int it = 0; it < options.golden_section_iterations; ++it) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = eval(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = eval(a);
      }
    }
    double log_s2 = fa > fb ? a : b;
    double sigma2 = std::exp(log_s2);
    fit_beta(design, sigma2, state, options);
    model.sigma2 = sigma2;
    model.converged = state.converged;
  }

  model.beta = state.beta;
  model.loglik = state.objective;
  model.iterations = state.iterations;
  for (size_t g = 0; g < design.groups(); ++g) {
    model.u[design.group_names[g]] = options.pin_sigma2 && *options.pin_sigma2 == 0.0
                                         ? 0.0
                                         : state.work[g].u;
  }

  Eigen::MatrixXd info = penalized_information(design, state, model.sigma2);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success) {
    throw ConvergenceError("mixed model: singular information at optimum");
  }
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  model.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return model;
}

double predict_engagement(const EngagementModel& model, const std::string& community,
                          bool treated, double sentiment, double toxicity, double attack) {
  auto it = model.u.find(community);
  if (it == model.u.end()) {
    throw DataError("engagement prediction: community not in fitted model: " + community);
  }
  double eta = model.beta[0] + it->second;
  if (treated) {
    eta += model.beta[1] + model.beta[2] * sentiment + model.beta[3] * toxicity +
           model.beta[4] * attack;
  }
  return sigmoid(eta);
}

std::vector<double> vif(const Eigen::MatrixXd& predictors) {
  const auto n = predictors.rows();
  const auto d = predictors.cols();
  if (d < 2) throw DataError("vif: need at least 2 non-intercept columns");
  if (n < d + 1) throw DataError("vif: more columns than observations");

  std::vector<double> out(static_cast<size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::MatrixXd others(n, d);  // intercept + remaining columns
    others.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == k) continue;
      others.col(c++) = predictors.col(j);
    }
    Eigen::VectorXd target = predictors.col(k);
    Eigen::VectorXd coef = others.colPivHouseholderQr().solve(target);
    double sse = (target - others * coef).squaredNorm();
    double mean = target.mean();
    double sst = (target.array() - mean).square().sum();
    if (sst <= 0.0) {
      out[static_cast<size_t>(k)] = std::numeric_limits<double>::infinity();
      continue;
    }
    double r2 = 1.0 - sse / sst;
    if (r2 >= 1.0 - 1e-12) {
      out[static_cast<size_t>(k)] = std::numeric_limits<double>::infinity();
    } else {
      out[static_cast<size_t>(k)] = 1.0 / (1.0 - r2);
    }
  }
  return out;
}

}  // namespace firstreply
