#pragma once

// Duelling Q-network on a flat parameter vector.
//
// Feed-forward ReLU trunk (three affine layers by default) with separate
// value and advantage heads recombined as Q = V + A - mean_a A (or the
// max-form behind a config switch). Parameters live in one contiguous
// Eigen vector so the optimizer, target-network copies, checkpointing,
// and finite-difference gradient checks all work on the same storage.
// Backpropagation is written out by hand; double precision throughout.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobsim/rng.hpp"

namespace lobsim {

struct QNetConfig {
  int input_dim = 0;
  std::vector<int> hidden{64, 64, 64};
  int actions = 7;
  bool dueling_mean = true;  // false: max-form aggregation

  void validate() const {
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("need at least one hidden layer");
    for (int h : hidden)
      if (h < 1) throw std::invalid_argument("hidden widths must be >= 1");
    if (actions < 2) throw std::invalid_argument("need >= 2 actions");
  }
};

class QNet {
 public:
  explicit QNet(QNetConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build_layout();
    theta_ = Eigen::VectorXd::Zero(total_);
  }

  static QNet initialized(QNetConfig cfg, std::uint64_t seed) {
    QNet net(std::move(cfg));
    Rng rng(seed);
    int in = net.cfg_.input_dim;
    for (std::size_t l = 0; l < net.cfg_.hidden.size(); ++l) {
      double scale = std::sqrt(2.0 / in);
      auto w = net.w(l);
      for (int c = 0; c < w.cols(); ++c)
        for (int r = 0; r < w.rows(); ++r) w(r, c) = rng.normal() * scale;
      in = net.cfg_.hidden[l];
    }
    double head_scale = 0.01;
    auto wv = net.wv();
    for (int c = 0; c < wv.cols(); ++c) wv(0, c) = rng.normal() * head_scale;
    auto wa = net.wa();
    for (int c = 0; c < wa.cols(); ++c)
      for (int r = 0; r < wa.rows(); ++r) wa(r, c) = rng.normal() * head_scale;
    return net;
  }

  const QNetConfig& config() const { return cfg_; }
  Eigen::Index param_count() const { return total_; }
  const Eigen::VectorXd& params() const { return theta_; }
  Eigen::VectorXd& params() { return theta_; }

  // Batch Q-values; one observation per row.
  Eigen::MatrixXd q_values(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    Cache cache;
    forward(x, theta_, cache);
    return cache.q;
  }

  Eigen::VectorXd q_values_single(std::span<const float> obs) const {
    if (static_cast<int>(obs.size()) != cfg_.input_dim)
      throw std::invalid_argument("observation size mismatch");
    Eigen::MatrixXd x(1, cfg_.input_dim);
    for (int i = 0; i < cfg_.input_dim; ++i) x(0, i) = obs[i];
    return q_values(x).row(0);
  }

  struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
  };

  // Mean Huber loss over Q(s_i, a_i) - y_i with its full parameter
  // gradient, laid out exactly like params().
  LossResult td_loss(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const std::vector<int>& actions,
                     const Eigen::Ref<const Eigen::VectorXd>& targets,
                     double huber_delta) const {
    const Eigen::Index batch = x.rows();
    if (static_cast<Eigen::Index>(actions.size()) != batch ||
        targets.size() != batch)
      throw std::invalid_argument("batch size mismatch");
    Cache cache;
    forward(x, theta_, cache);

    LossResult out;
    out.grad = Eigen::VectorXd::Zero(total_);
    Eigen::MatrixXd g_q = Eigen::MatrixXd::Zero(batch, cfg_.actions);
    for (Eigen::Index i = 0; i < batch; ++i) {
      int a = actions[i];
      if (a < 0 || a >= cfg_.actions) throw std::invalid_argument("bad action index");
      double err = cache.q(i, a) - targets(i);
      double abs_err = std::abs(err);
      if (abs_err <= huber_delta)
        out.loss += 0.5 * err * err;
      else
        out.loss += huber_delta * (abs_err - 0.5 * huber_delta);
      double g = std::clamp(err, -huber_delta, huber_delta) /
                 static_cast<double>(batch);
      g_q(i, a) = g;
    }
    out.loss /= static_cast<double>(batch);
    backward(cache, g_q, out.grad);
    return out;
  }

  void save(std::ostream& os) const {
    os << "lobsim-qnet 1\n";
    os << cfg_.input_dim << ' ' << cfg_.actions << ' '
       << (cfg_.dueling_mean ? 1 : 0) << ' ' << cfg_.hidden.size();
    for (int h : cfg_.hidden) os << ' ' << h;
    os << '\n' << total_ << '\n';
    os.precision(17);
    for (Eigen::Index i = 0; i < total_; ++i) os << theta_(i) << '\n';
  }

  static QNet load(std::istream& is) {
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "lobsim-qnet" || version != 1)
      throw std::runtime_error("not a qnet checkpoint");
    QNetConfig cfg;
    int dueling = 0;
    std::size_t layers = 0;
    is >> cfg.input_dim >> cfg.actions >> dueling >> layers;
    cfg.dueling_mean = dueling != 0;
    cfg.hidden.resize(layers);
    for (auto& h : cfg.hidden) is >> h;
    Eigen::Index count = 0;
    is >> count;
    QNet net(cfg);
    if (count != net.total_) throw std::runtime_error("checkpoint size mismatch");
    for (Eigen::Index i = 0; i < count; ++i) is >> net.theta_(i);
    if (!is) throw std::runtime_error("truncated qnet checkpoint");
    return net;
  }

 private:
  struct Span {
    Eigen::Index off = 0;
    int rows = 0, cols = 0;
    Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
  };

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  void build_layout() {
    Eigen::Index off = 0;
    int in = cfg_.input_dim;
    for (int h : cfg_.hidden) {
      wspan_.push_back({off, h, in});
      off += wspan_.back().size();
      bspan_.push_back({off, h, 1});
      off += h;
      in = h;
    }
    wv_ = {off, 1, in};
    off += wv_.size();
    bv_ = {off, 1, 1};
    off += 1;
    wa_ = {off, cfg_.actions, in};
    off += wa_.size();
    ba_ = {off, cfg_.actions, 1};
    off += cfg_.actions;
    total_ = off;
  }

  MatMap w(std::size_t l) {
    return {theta_.data() + wspan_[l].off, wspan_[l].rows, wspan_[l].cols};
  }
  VecMap b(std::size_t l) { return {theta_.data() + bspan_[l].off, bspan_[l].rows}; }
  MatMap wv() { return {theta_.data() + wv_.off, wv_.rows, wv_.cols}; }
  MatMap wa() { return {theta_.data() + wa_.off, wa_.rows, wa_.cols}; }

  struct Cache {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, post-ReLU after
    Eigen::MatrixXd v;                  // B x 1
    Eigen::MatrixXd adv;                // B x A
    Eigen::MatrixXd q;                  // B x A
  };

  void forward(const Eigen::Ref<const Eigen::MatrixXd>& x,
               const Eigen::VectorXd& theta, Cache& cache) const {
    if (x.cols() != cfg_.input_dim)
      throw std::invalid_argument("input width mismatch");
    cache.acts.clear();
    cache.acts.push_back(x);
    for (std::size_t l = 0; l < wspan_.size(); ++l) {
      ConstMatMap w(theta.data() + wspan_[l].off, wspan_[l].rows, wspan_[l].cols);
      ConstVecMap b(theta.data() + bspan_[l].off, bspan_[l].rows);
      Eigen::MatrixXd z =
          (cache.acts.back() * w.transpose()).rowwise() + b.transpose();
      cache.acts.push_back(z.cwiseMax(0.0));
    }
    ConstMatMap wv(theta.data() + wv_.off, wv_.rows, wv_.cols);
    ConstVecMap bv(theta.data() + bv_.off, 1);
    ConstMatMap wa(theta.data() + wa_.off, wa_.rows, wa_.cols);
    ConstVecMap ba(theta.data() + ba_.off, cfg_.actions);
    const Eigen::MatrixXd& top = cache.acts.back();
    cache.v = (top * wv.transpose()).rowwise() + bv.transpose();
    cache.adv = (top * wa.transpose()).rowwise() + ba.transpose();
    cache.q = cache.adv;
    if (cfg_.dueling_mean) {
      Eigen::VectorXd mean = cache.adv.rowwise().mean();
      cache.q.colwise() -= mean;
    } else {
      Eigen::VectorXd mx = cache.adv.rowwise().maxCoeff();
      cache.q.colwise() -= mx;
    }
    cache.q.colwise() += cache.v.col(0);
    if (!cache.q.allFinite())
      throw std::runtime_error("non-finite activations in q network");
  }

  void backward(const Cache& cache, const Eigen::MatrixXd& g_q,
                Eigen::VectorXd& grad) const {
    const Eigen::Index batch = g_q.rows();
    const double a_count = static_cast<double>(cfg_.actions);
    Eigen::VectorXd g_v = g_q.rowwise().sum();

    Eigen::MatrixXd g_adv = g_q;
    if (cfg_.dueling_mean) {
      g_adv.colwise() -= (g_v / a_count).eval();
    } else {
      for (Eigen::Index i = 0; i < batch; ++i) {
        Eigen::Index amax = 0;
        cache.adv.row(i).maxCoeff(&amax);
        g_adv(i, amax) -= g_v(i);
      }
    }

    ConstMatMap wv(theta_.data() + wv_.off, wv_.rows, wv_.cols);
    ConstMatMap wa(theta_.data() + wa_.off, wa_.rows, wa_.cols);
    const Eigen::MatrixXd& top = cache.acts.back();

    MatMap(grad.data() + wa_.off, wa_.rows, wa_.cols) = g_adv.transpose() * top;
    VecMap(grad.data() + ba_.off, cfg_.actions) = g_adv.colwise().sum();
    MatMap(grad.data() + wv_.off, wv_.rows, wv_.cols) = g_v.transpose() * top;
    grad(bv_.off) = g_v.sum();

    Eigen::MatrixXd g_act = g_adv * wa + g_v * wv;
    for (std::size_t l = wspan_.size(); l-- > 0;) {
      const Eigen::MatrixXd& post = cache.acts[l + 1];
      Eigen::MatrixXd g_z =
          g_act.cwiseProduct((post.array() > 0.0).cast<double>().matrix());
      MatMap(grad.data() + wspan_[l].off, wspan_[l].rows, wspan_[l].cols) =
          g_z.transpose() * cache.acts[l];
      VecMap(grad.data() + bspan_[l].off, bspan_[l].rows) = g_z.colwise().sum();
      ConstMatMap w(theta_.data() + wspan_[l].off, wspan_[l].rows, wspan_[l].cols);
      if (l > 0) g_act = g_z * w;
    }
  }

  QNetConfig cfg_;
  Eigen::VectorXd theta_;
  std::vector<Span> wspan_, bspan_;
  Span wv_, bv_, wa_, ba_;
  Eigen::Index total_ = 0;
};

// Adaptive-moment gradient step with bias correction; plain SGD available
// for gradient-check style tests.
class AdamOptimizer {
 public:
  AdamOptimizer(Eigen::Index size, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)),
        beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    theta -= (lr / c1) * m_.cwiseQuotient(((v_ / c2).cwiseSqrt().array() + eps_).matrix());
  }

 private:
  Eigen::VectorXd m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

struct LrSchedule {
  // (step, lr) breakpoints with linear interpolation, clamped outside.
  std::vector<std::pair<std::int64_t, double>> points{{0, 2e-5}, {1000000, 5e-6}};

  double at(std::int64_t step) const {
    if (points.empty()) throw std::logic_error("empty lr schedule");
    if (step <= points.front().first) return points.front().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (step <= points[i].first) {
        auto [s0, v0] = points[i - 1];
        auto [s1, v1] = points[i];
        double f = static_cast<double>(step - s0) / static_cast<double>(s1 - s0);
        return v0 + f * (v1 - v0);
      }
    }
    return points.back().second;
  }

  void validate() const {
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].first <= points[i - 1].first)
        throw std::invalid_argument("lr schedule breakpoints must increase");
  }
};

}  // namespace lobsim
