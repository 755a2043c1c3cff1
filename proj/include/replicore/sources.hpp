#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"
#include "replicore/samplers.hpp"

namespace replicore {

// Sources own their sample-side randomness and count every scalar draw they
// deliver. Batch entry points draw the sufficient statistic of the batch
// (head counts, category counts, batch means) in one shot; the law of what
// the algorithms observe is identical to per-draw simulation, only the
// counter advances by the full batch size.

class CoinSource {
 public:
  virtual ~CoinSource() = default;
  virtual bool flip() = 0;
  // Number of heads among m fresh flips.
  virtual uint64_t batch_heads(uint64_t m) {
    uint64_t h = 0;
    for (uint64_t i = 0; i < m; ++i) h += flip() ? 1 : 0;
    return h;
  }
  uint64_t consumed() const { return consumed_; }

 protected:
  uint64_t consumed_ = 0;
};

class BernoulliCoin final : public CoinSource {
 public:
  BernoulliCoin(double p, SharedRandomness rng) : p_(p), rng_(std::move(rng)) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("BernoulliCoin: p in [0,1]");
  }
  bool flip() override {
    ++consumed_;
    return rng_.uniform01() < p_;
  }
  uint64_t batch_heads(uint64_t m) override {
    consumed_ += m;
    return binomial_draw(rng_, m, p_);
  }
  double bias() const { return p_; }

 private:
  double p_;
  SharedRandomness rng_;
};

// Observes an underlying coin and re-flips: heads stay heads with
// probability h, tails turn heads with probability t. The delivered coin is
// Bernoulli(p*h + (1-p)*t); batch counts use the exact two-stage law.
class ReflippedCoin final : public CoinSource {
 public:
  ReflippedCoin(CoinSource& inner, double h, double t, SharedRandomness rng)
      : inner_(inner), h_(h), t_(t), rng_(std::move(rng)) {}
  bool flip() override {
    ++consumed_;
    const bool x = inner_.flip();
    const double keep = x ? h_ : t_;
    return rng_.uniform01() < keep;
  }
  uint64_t batch_heads(uint64_t m) override {
    consumed_ += m;
    const uint64_t heads = inner_.batch_heads(m);
    return binomial_draw(rng_, heads, h_) + binomial_draw(rng_, m - heads, t_);
  }

 private:
  CoinSource& inner_;
  double h_, t_;
  SharedRandomness rng_;
};

// Heads<->tails swap of an underlying coin.
class InvertedCoin final : public CoinSource {
 public:
  explicit InvertedCoin(CoinSource& inner) : inner_(inner) {}
  bool flip() override {
    ++consumed_;
    return !inner_.flip();
  }
  uint64_t batch_heads(uint64_t m) override {
    consumed_ += m;
    return m - inner_.batch_heads(m);
  }

 private:
  CoinSource& inner_;
};

// Finite discrete source over atoms indexed 0..k-1.
class DiscreteSource {
 public:
  virtual ~DiscreteSource() = default;
  virtual size_t domain_size() const = 0;
  virtual size_t draw() = 0;
  // Counts per atom among m fresh draws.
  virtual std::vector<uint64_t> batch_counts(uint64_t m) {
    std::vector<uint64_t> c(domain_size(), 0);
    for (uint64_t i = 0; i < m; ++i) ++c[draw()];
    return c;
  }
  uint64_t consumed() const { return consumed_; }

 protected:
  uint64_t consumed_ = 0;
};

class FiniteDiscrete final : public DiscreteSource {
 public:
  FiniteDiscrete(std::vector<double> masses, SharedRandomness rng)
      : masses_(std::move(masses)), rng_(std::move(rng)) {
    double total = 0.0;
    for (double m : masses_) {
      if (m < 0.0) throw std::invalid_argument("FiniteDiscrete: negative mass");
      total += m;
    }
    if (total <= 0.0) throw std::invalid_argument("FiniteDiscrete: zero total mass");
    for (double& m : masses_) m /= total;
  }
  size_t domain_size() const override { return masses_.size(); }
  size_t draw() override {
    ++consumed_;
    double u = rng_.uniform01();
    for (size_t i = 0; i + 1 < masses_.size(); ++i) {
      if (u < masses_[i]) return i;
      u -= masses_[i];
    }
    return masses_.size() - 1;
  }
  std::vector<uint64_t> batch_counts(uint64_t m) override {
    consumed_ += m;
    return multinomial_draw(rng_, m, masses_);
  }
  const std::vector<double>& masses() const { return masses_; }

 private:
  std::vector<double> masses_;
  SharedRandomness rng_;
};

// Vector-valued source on R^N; one vector draw counts N scalar draws.
class VectorSource {
 public:
  virtual ~VectorSource() = default;
  virtual size_t dim() const = 0;
  virtual Vec draw() = 0;
  // Mean of a batch of b fresh vector draws.
  virtual Vec batch_mean(uint64_t b) {
    Vec s(dim(), 0.0);
    for (uint64_t i = 0; i < b; ++i) {
      Vec x = draw();
      for (size_t j = 0; j < s.size(); ++j) s[j] += x[j];
    }
    for (double& v : s) v /= double(b);
    return s;
  }
  uint64_t vector_draws() const { return vector_draws_; }
  uint64_t consumed() const { return vector_draws_ * dim_hint_; }

 protected:
  void account(uint64_t b) { vector_draws_ += b; }
  uint64_t vector_draws_ = 0;
  size_t dim_hint_ = 0;
};

class GaussianSource final : public VectorSource {
 public:
  GaussianSource(Vec mean, SharedRandomness rng)
      : mean_(std::move(mean)), rng_(std::move(rng)) {
    dim_hint_ = mean_.size();
  }
  size_t dim() const override { return mean_.size(); }
  Vec draw() override {
    account(1);
    Vec x(mean_.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = mean_[i] + rng_.normal();
    return x;
  }
  Vec batch_mean(uint64_t b) override {
    account(b);
    const double s = 1.0 / std::sqrt(double(b));
    Vec x(mean_.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = mean_[i] + s * rng_.normal();
    return x;
  }

 private:
  Vec mean_;
  SharedRandomness rng_;
};

class ProductBernoulliSource final : public VectorSource {
 public:
  ProductBernoulliSource(Vec biases, SharedRandomness rng)
      : biases_(std::move(biases)), rng_(std::move(rng)) {
    dim_hint_ = biases_.size();
    for (double p : biases_)
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("ProductBernoulliSource: bias in [0,1]");
  }
  size_t dim() const override { return biases_.size(); }
  Vec draw() override {
    account(1);
    Vec x(biases_.size());
    for (size_t i = 0; i < x.size(); ++i)
      x[i] = rng_.uniform01() < biases_[i] ? 1.0 : 0.0;
    return x;
  }
  Vec batch_mean(uint64_t b) override {
    account(b);
    Vec x(biases_.size());
    for (size_t i = 0; i < x.size(); ++i)
      x[i] = double(binomial_draw(rng_, b, biases_[i])) / double(b);
    return x;
  }
  const Vec& biases() const { return biases_; }

 private:
  Vec biases_;
  SharedRandomness rng_;
};

class PointMassSource final : public VectorSource {
 public:
  explicit PointMassSource(Vec point) : point_(std::move(point)) {
    dim_hint_ = point_.size();
  }
  size_t dim() const override { return point_.size(); }
  Vec draw() override {
    account(1);
    return point_;
  }
  Vec batch_mean(uint64_t b) override {
    account(b);
    return point_;
  }

 private:
  Vec point_;
};

// Symmetric two-point source at +/-v; batch means follow the exact
// rescaled-binomial law.
class TwoPointSource final : public VectorSource {
 public:
  TwoPointSource(Vec v, SharedRandomness rng) : v_(std::move(v)), rng_(std::move(rng)) {
    dim_hint_ = v_.size();
  }
  size_t dim() const override { return v_.size(); }
  Vec draw() override {
    account(1);
    const double s = rng_.uniform01() < 0.5 ? 1.0 : -1.0;
    Vec x(v_.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = s * v_[i];
    return x;
  }
  Vec batch_mean(uint64_t b) override {
    account(b);
    const uint64_t plus = binomial_draw(rng_, b, 0.5);
    const double s = (2.0 * double(plus) - double(b)) / double(b);
    Vec x(v_.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = s * v_[i];
    return x;
  }

 private:
  Vec v_;
  SharedRandomness rng_;
};

// Coordinate shift of an underlying source; draws pass through.
class ShiftedSource final : public VectorSource {
 public:
  ShiftedSource(VectorSource& inner, Vec offset)
      : inner_(inner), offset_(std::move(offset)) {
    dim_hint_ = offset_.size();
  }
  size_t dim() const override { return inner_.dim(); }
  Vec draw() override {
    Vec x = inner_.draw();
    for (size_t i = 0; i < x.size(); ++i) x[i] += offset_[i];
    return x;
  }
  Vec batch_mean(uint64_t b) override {
    Vec x = inner_.batch_mean(b);
    for (size_t i = 0; i < x.size(); ++i) x[i] += offset_[i];
    return x;
  }
  uint64_t inner_vector_draws() const { return inner_.vector_draws(); }

 private:
  VectorSource& inner_;
  Vec offset_;
};

// Source of p-values on [0,1].
class PValueSource {
 public:
  virtual ~PValueSource() = default;
  virtual double draw() = 0;
  uint64_t consumed() const { return consumed_; }

 protected:
  uint64_t consumed_ = 0;
};

class CallbackPValueSource final : public PValueSource {
 public:
  explicit CallbackPValueSource(std::function<double()> fn) : fn_(std::move(fn)) {}
  double draw() override {
    ++consumed_;
    return fn_();
  }

 private:
  std::function<double()> fn_;
};

}  // namespace replicore
