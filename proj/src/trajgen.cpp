#include "tailopt/trajgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tailopt/rng.hpp"

namespace tailopt {

void FourierTarget::eval(double t, Eigen::Vector3d& theta,
                         Eigen::Vector3d& theta_dot) const {
  if (t < kT0 - 1e-12 || t > kTf + 1e-12)
    throw Error("target evaluation time outside [0, 0.5] s");
  for (int i = 0; i < 3; ++i) {
    double th = a[i][0];
    double thd = 0.0;
    for (int j = 1; j <= kDegree; ++j) {
      const double w = j * omega[i];
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      th += a[i][j] * c + b[i][j - 1] * s;
      thd += w * (-a[i][j] * s + b[i][j - 1] * c);
    }
    theta(i) = th;
    theta_dot(i) = thd;
  }
}

Eigen::Vector3d FourierTarget::angles(double t) const {
  Eigen::Vector3d th, thd;
  eval(t, th, thd);
  return th;
}

bool FourierTarget::within_bounds() const {
  Eigen::Vector3d th, thd;
  for (int k = 0; k <= 500; ++k) {
    eval(kTf * k / 500.0, th, thd);
    if (th.cwiseAbs().maxCoeff() > kPi || thd.cwiseAbs().maxCoeff() > 2.0 * kPi)
      return false;
  }
  return true;
}

bool operator==(const FourierTarget& x, const FourierTarget& y) {
  for (int i = 0; i < 3; ++i) {
    if (x.omega[i] != y.omega[i]) return false;
    for (int j = 0; j < 6; ++j)
      if (x.a[i][j] != y.a[i][j]) return false;
    for (int j = 0; j < 5; ++j)
      if (x.b[i][j] != y.b[i][j]) return false;
  }
  return true;
}

FourierTarget sample_target(std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    FourierTarget t;
    for (int i = 0; i < 3; ++i) {
      // One to two base oscillation periods fit the 0.5 s window.
      t.omega[i] = rng.uniform(kPi, 4.0 * kPi);
      double s1 = 0.0, s2 = 0.0;
      double raw_a[6] = {}, raw_b[5] = {};
      for (int j = 1; j <= FourierTarget::kDegree; ++j) {
        raw_a[j] = rng.uniform(-1.0, 1.0) / j;
        raw_b[j - 1] = rng.uniform(-1.0, 1.0) / j;
        s1 += std::abs(raw_a[j]) + std::abs(raw_b[j - 1]);
        s2 += j * t.omega[i] * (std::abs(raw_a[j]) + std::abs(raw_b[j - 1]));
      }
      // Scale so that sum(|a|+|b|) <= amp*pi and sum(j w (|a|+|b|)) <= amp*2pi,
      // the conservative sufficient conditions for the velocity bound.
      const double amp = rng.uniform(0.35, 0.95);
      const double scale = amp * std::min(kPi / s1, 2.0 * kPi / s2);
      double a0 = 0.0;
      for (int j = 1; j <= FourierTarget::kDegree; ++j) {
        t.a[i][j] = raw_a[j] * scale;
        t.b[i][j - 1] = raw_b[j - 1] * scale;
        a0 -= t.a[i][j];
      }
      t.a[i][0] = a0;  // theta_i(0) = 0 exactly
    }
    if (t.within_bounds()) return t;
  }
  throw Error("sample_target: could not satisfy trajectory bounds after 200 draws");
}

std::vector<FourierTarget> gen_batch(std::uint64_t seed, int count) {
  if (count < 1) throw Error("gen_batch: count must be >= 1");
  std::vector<FourierTarget> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(sample_target(derive_seed(seed, static_cast<std::uint64_t>(i))));
  return out;
}

namespace {

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string targets_to_csv(const std::vector<FourierTarget>& targets) {
  std::ostringstream out;
  out << "trial_id,axis,a0,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,omega\n";
  for (size_t k = 0; k < targets.size(); ++k) {
    const FourierTarget& t = targets[k];
    for (int i = 0; i < 3; ++i) {
      out << k << ',' << (i + 1);
      for (int j = 0; j < 6; ++j) out << ',' << fmt_g17(t.a[i][j]);
      for (int j = 0; j < 5; ++j) out << ',' << fmt_g17(t.b[i][j]);
      out << ',' << fmt_g17(t.omega[i]) << '\n';
    }
  }
  return out.str();
}

std::vector<FourierTarget> targets_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("targets CSV: empty file");
  std::vector<FourierTarget> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 14)
      throw Error("targets CSV line " + std::to_string(lineno) + ": expected 14 columns");
    const size_t trial = std::stoul(cells[0]);
    const int axis = std::stoi(cells[1]);
    if (axis < 1 || axis > 3)
      throw Error("targets CSV line " + std::to_string(lineno) + ": axis must be 1..3");
    if (trial >= out.size()) out.resize(trial + 1);
    FourierTarget& t = out[trial];
    for (int j = 0; j < 6; ++j) t.a[axis - 1][j] = std::stod(cells[static_cast<size_t>(2 + j)]);
    for (int j = 0; j < 5; ++j) t.b[axis - 1][j] = std::stod(cells[static_cast<size_t>(8 + j)]);
    t.omega[axis - 1] = std::stod(cells[13]);
  }
  return out;
}

void write_targets_file(const std::vector<FourierTarget>& targets, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write targets file '" + path + "'");
  out << targets_to_csv(targets);
}

std::vector<FourierTarget> read_targets_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open targets file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return targets_from_csv(ss.str());
}

}  // namespace tailopt
