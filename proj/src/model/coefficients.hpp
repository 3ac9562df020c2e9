#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "expr/compiled.hpp"
#include "model/system.hpp"

namespace stochsym::model {

// Numeric view of a system: drift f (n) and diffusion s (n*m, row-major) at a
// slot vector (x..., t, w...). Singular points give NaN entries. Symbolic
// systems and numeric-only transformed systems both implement it; the Monte
// Carlo engine only sees this interface. Implementations are immutable and
// callable concurrently (each caller owns its scratch).
class CoefficientModel {
 public:
  virtual ~CoefficientModel() = default;
  virtual int n() const = 0;
  virtual int m() const = 0;
  virtual void evaluate(std::span<const double> slots, std::span<double> f,
                        std::span<double> sigma, std::vector<double>& scratch) const = 0;
  virtual std::string describe() const = 0;
};

class CompiledSystem final : public CoefficientModel {
 public:
  explicit CompiledSystem(const System& sys);

  int n() const override { return n_; }
  int m() const override { return m_; }
  void evaluate(std::span<const double> slots, std::span<double> f, std::span<double> sigma,
                std::vector<double>& scratch) const override;
  std::string describe() const override { return "symbolic"; }

 private:
  int n_;
  int m_;
  expr::CompiledBundle bundle_;
};

// Coefficients supplied as a callable; used when a transformed system has no
// closed form (numeric inverse map).
class NumericSystem final : public CoefficientModel {
 public:
  using Fn = std::function<void(std::span<const double> slots, std::span<double> f,
                                std::span<double> sigma, std::vector<double>& scratch)>;

  NumericSystem(int n, int m, Fn fn, std::string description)
      : n_(n), m_(m), fn_(std::move(fn)), description_(std::move(description)) {}

  int n() const override { return n_; }
  int m() const override { return m_; }
  void evaluate(std::span<const double> slots, std::span<double> f, std::span<double> sigma,
                std::vector<double>& scratch) const override {
    fn_(slots, f, sigma, scratch);
  }
  std::string describe() const override { return description_; }

 private:
  int n_;
  int m_;
  Fn fn_;
  std::string description_;
};

}  // namespace stochsym::model
