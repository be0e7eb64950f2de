#pragma once

#include <Eigen/Core>

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Shared helpers for the plain-text serialization formats (bases, MDP models,
// learner snapshots).  Numbers are written with %.17g so doubles round-trip
// exactly.

namespace mdrl::text_io {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_vector(std::ostream& os, const std::string& name, const Eigen::VectorXd& v) {
  os << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << fmt_double(v[i]) << (i + 1 == v.size() ? '\n' : ' ');
  }
  if (v.size() == 0) os << '\n';
}

inline void write_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      os << fmt_double(m(r, c)) << (c + 1 == m.cols() ? '\n' : ' ');
    }
    if (m.cols() == 0) os << '\n';
  }
}

inline void expect(std::istream& is, const std::string& token) {
  std::string got;
  if (!(is >> got) || got != token) {
    throw std::runtime_error("parse error: expected '" + token + "', got '" + got + "'");
  }
}

template <typename T>
T read_value(std::istream& is, const std::string& key) {
  expect(is, key);
  T v{};
  if (!(is >> v)) throw std::runtime_error("parse error: bad value for '" + key + "'");
  return v;
}

inline Eigen::VectorXd read_vector(std::istream& is, const std::string& name) {
  expect(is, name);
  Eigen::Index n;
  if (!(is >> n) || n < 0) throw std::runtime_error("parse error: bad size for '" + name + "'");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(is >> v[i])) throw std::runtime_error("parse error: short vector '" + name + "'");
  }
  return v;
}

inline Eigen::MatrixXd read_matrix(std::istream& is, const std::string& name) {
  expect(is, name);
  Eigen::Index rows, cols;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
    throw std::runtime_error("parse error: bad shape for '" + name + "'");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(is >> m(r, c))) throw std::runtime_error("parse error: short matrix '" + name + "'");
    }
  }
  return m;
}

}  // namespace mdrl::text_io
