#pragma once

#include "semdac/core/common.hpp"
#include "semdac/model/modules.hpp"

#include <cmath>
#include <vector>

namespace semdac {

// AdamW over a ParamStore. Weight decay defaults to 0 (plain Adam behavior);
// state is addressed positionally, which is stable because stores register
// parameters in a fixed order.
template <typename S>
class AdamW {
 public:
  AdamW() = default;
  AdamW(double lr, double beta1, double beta2, double weight_decay)
      : lr_(lr), beta1_(beta1), beta2_(beta2), wd_(weight_decay) {}

  void attach(const ParamStore<S>& store) {
    m_.clear();
    v_.clear();
    for (auto* p : store.items) {
      m_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
    step_ = 0;
  }

  // grads aligned with store.items; empty entries are treated as zero
  void step(ParamStore<S>& store, const std::vector<Mat<S>>& grads) {
    require(grads.size() == store.items.size() && m_.size() == store.items.size(), Err::value,
            "optimizer/store mismatch");
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, double(step_));
    const double bc2 = 1.0 - std::pow(beta2_, double(step_));
    for (size_t i = 0; i < store.items.size(); ++i) {
      if (grads[i].size() == 0) continue;  // untouched this step
      Mat<S>& theta = store.items[i]->value;
      m_[i] = (S)beta1_ * m_[i] + (S)(1.0 - beta1_) * grads[i];
      v_[i] = ((S)beta2_ * v_[i].array() + (S)(1.0 - beta2_) * grads[i].array().square()).matrix();
      auto m_hat = m_[i].array() / (S)bc1;
      auto v_hat = v_[i].array() / (S)bc2;
      theta.array() -= (S)lr_ * (m_hat / (v_hat.sqrt() + (S)eps_) + (S)wd_ * theta.array());
    }
  }

  uint64_t steps_taken() const { return step_; }

  // checkpoint access
  std::vector<Mat<S>>& moments1() { return m_; }
  std::vector<Mat<S>>& moments2() { return v_; }
  const std::vector<Mat<S>>& moments1() const { return m_; }
  const std::vector<Mat<S>>& moments2() const { return v_; }
  void set_step(uint64_t s) { step_ = s; }
  double lr() const { return lr_; }

 private:
  double lr_ = 1e-4, beta1_ = 0.8, beta2_ = 0.9, wd_ = 0.0, eps_ = 1e-8;
  std::vector<Mat<S>> m_, v_;
  uint64_t step_ = 0;
};

}  // namespace semdac
