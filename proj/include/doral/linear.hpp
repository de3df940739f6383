#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "doral/env.hpp"

namespace doral {

// Censored ridge regression for one context class plus the delayed LinUCB
// index. The design matrix V grows at pull time; the response side G only
// when feedback returns inside the cut-off window. A ring of the last
// `window` pulled feature vectors feeds the index's window penalty.
class ContextRegressor {
 public:
  ContextRegressor() = default;
  ContextRegressor(Eigen::Index dim, double lambda, std::size_t window)
      : lambda_(lambda), window_(window) {
    if (dim <= 0) throw ModelError("ContextRegressor: dimension must be positive");
    if (!(lambda > 0.0)) throw ModelError("ContextRegressor: lambda must be > 0");
    v_ = lambda * Matrix::Identity(dim, dim);
    g_ = Vector::Zero(dim);
  }

  Eigen::Index dim() const { return g_.size(); }
  long pull_count() const { return pulls_; }
  const Matrix& design() const { return v_; }
  const Vector& response() const { return g_; }
  std::size_t recent_count() const { return recent_.size(); }
  std::uint64_t version() const { return version_; }

  void record_pull(const Vector& f) {
    check_dim(f);
    v_.selfadjointView<Eigen::Lower>().rankUpdate(f);
    v_ = v_.selfadjointView<Eigen::Lower>();
    if (window_ > 0) {
      recent_.push_back(f);
      if (recent_.size() > window_) recent_.pop_front();
    }
    ++pulls_;
    ++version_;
    design_dirty_ = true;
    theta_dirty_ = true;
  }

  // within_cutoff mirrors D <= min(m, u - t): censored-out rewards leave G
  // untouched.
  void record_feedback(const Vector& f, double reward, bool within_cutoff) {
    check_dim(f);
    if (!within_cutoff) return;
    g_ += reward * f;
    ++version_;
    theta_dirty_ = true;
  }

  // Ridge estimate solving V theta = G.
  const Vector& theta_hat() const {
    refresh_theta();
    return theta_;
  }

  double predict(const Vector& f) const {
    check_dim(f);
    return theta_hat().dot(f);
  }

  double vinv_norm(const Vector& f) const {
    check_dim(f);
    refresh_design();
    return std::sqrt(f.dot(llt_.solve(f)));
  }

  // sqrt(lambda) + sqrt(2 log(1/delta) + d log((d lambda + t) / (d lambda)))
  double confidence_width(double delta) const {
    const double d = static_cast<double>(dim());
    const double t = static_cast<double>(pulls_);
    return std::sqrt(lambda_) +
           std::sqrt(2.0 * std::log(1.0 / delta) +
                     d * std::log((d * lambda_ + t) / (d * lambda_)));
  }

  // Delayed LinUCB index:
  //   <theta_hat, f> + (2 f_{t,delta} + sum_{f' in ring} |f'|_{V^-1}) |f|_{V^-1}
  double index(const Vector& f, double delta) const {
    return predict(f) + (2.0 * confidence_width(delta) + window_penalty()) * vinv_norm(f);
  }

  double window_penalty() const {
    refresh_design();
    return window_sum_;
  }

 private:
  void check_dim(const Vector& f) const {
    if (f.size() != g_.size())
      throw ModelError("ContextRegressor: feature dimension mismatch");
  }

  void refresh_design() const {
    if (!design_dirty_) return;
    llt_.compute(v_);
    window_sum_ = 0.0;
    for (const auto& f : recent_) window_sum_ += std::sqrt(f.dot(llt_.solve(f)));
    design_dirty_ = false;
  }

  void refresh_theta() const {
    refresh_design();
    if (!theta_dirty_) return;
    theta_ = llt_.solve(g_);
    theta_dirty_ = false;
  }

  double lambda_ = 1.0;
  std::size_t window_ = 0;
  Matrix v_;
  Vector g_;
  std::deque<Vector> recent_;
  long pulls_ = 0;
  std::uint64_t version_ = 0;
  mutable bool design_dirty_ = true;
  mutable bool theta_dirty_ = true;
  mutable Eigen::LLT<Matrix> llt_;
  mutable Vector theta_;
  mutable double window_sum_ = 0.0;
};

}  // namespace doral
