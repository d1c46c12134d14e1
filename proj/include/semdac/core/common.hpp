#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semdac {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Err {
  io,           // file missing / unreadable
  format,       // malformed container or header
  unsupported,  // recognized but not handled (e.g. 24-bit WAV)
  range,        // out-of-bounds request
  value,        // bad argument / shape mismatch
  corrupt,      // payload fails integrity checks
  config,       // bad config file or key
  numeric,      // non-finite value where finite required
  align,        // teacher/codec frame mismatch beyond tolerance
};

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Err kind() const { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, Err kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace semdac
