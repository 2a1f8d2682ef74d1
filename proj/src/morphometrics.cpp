#include "tailopt/morphometrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace tailopt {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double two_sided_p(double t, double df) {
  const boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

std::vector<double> normalize(const std::vector<double>& lengths) {
  if (lengths.empty()) throw Error("normalize: empty vertebral series");
  for (double l : lengths)
    if (!(l > 0.0)) throw Error("normalize: centrum lengths must be positive");
  std::vector<double> out(lengths.size());
  const double first = lengths.front();
  for (size_t i = 0; i < lengths.size(); ++i) out[i] = lengths[i] / first;
  return out;
}

std::vector<double> normalize(const VertebralSeries& series) {
  return normalize(series.lengths_mm);
}

double max_neighbor_diff(const std::vector<double>& normalized) {
  if (normalized.size() < 2)
    throw Error("max_neighbor_diff: need at least 2 vertebrae");
  double best = 0.0;
  for (size_t i = 0; i + 1 < normalized.size(); ++i)
    best = std::max(best, std::abs(normalized[i + 1] - normalized[i]));
  return best;
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_t_test: need >= 2 samples per group");
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  if (va <= 0.0 && vb <= 0.0) throw Error("welch_t_test: both samples are degenerate");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;

  TTestResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  r.p = r.t == 0.0 ? 1.0 : two_sided_p(r.t, r.df);
  return r;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("paired_t_test: samples must have equal length");
  if (a.size() < 2) throw Error("paired_t_test: need >= 2 pairs");
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double md = mean(d);
  const double vd = sample_variance(d, md);
  if (!(vd > 0.0)) throw Error("paired_t_test: zero difference variance");

  TTestResult r;
  const double n = static_cast<double>(d.size());
  r.t = md / std::sqrt(vd / n);
  r.df = n - 1.0;
  r.p = two_sided_p(r.t, r.df);
  return r;
}

std::vector<VertebralSeries> read_morpho_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("morphometrics CSV: empty file");
  {
    std::istringstream hdr(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hdr, col, ',')) cols.push_back(col);
    if (cols.size() != 4 || cols[0] != "species" || cols[1] != "group" ||
        cols[2] != "vertebra_index" || cols[3] != "centrum_length_mm")
      throw Error(
          "morphometrics CSV: expected header "
          "'species,group,vertebra_index,centrum_length_mm'");
  }

  std::vector<VertebralSeries> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string species, group, idx_s, len_s;
    if (!std::getline(row, species, ',') || !std::getline(row, group, ',') ||
        !std::getline(row, idx_s, ',') || !std::getline(row, len_s, ','))
      throw Error("morphometrics CSV line " + std::to_string(lineno) + ": bad row");

    VertebralSeries::Group g;
    if (group == "inertial_maneuvering") g = VertebralSeries::Group::kInertialManeuvering;
    else if (group == "nonspecialist") g = VertebralSeries::Group::kNonspecialist;
    else
      throw Error("morphometrics CSV line " + std::to_string(lineno) +
                  ": unknown group '" + group + "'");

    VertebralSeries* series = nullptr;
    for (auto& s : out)
      if (s.species == species) series = &s;
    if (series == nullptr) {
      out.push_back({species, g, {}});
      series = &out.back();
    }
    const size_t idx = std::stoul(idx_s);
    if (idx < 1) throw Error("morphometrics CSV: vertebra_index is 1-based");
    if (series->lengths_mm.size() < idx) series->lengths_mm.resize(idx, 0.0);
    series->lengths_mm[idx - 1] = std::stod(len_s);
  }
  for (const auto& s : out)
    for (double l : s.lengths_mm)
      if (!(l > 0.0))
        throw Error("morphometrics CSV: species '" + s.species +
                    "' has a missing or non-positive centrum length");
  return out;
}

std::vector<VertebralSeries> read_morpho_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open morphometrics file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_morpho_csv(ss.str());
}

MorphoReport morpho_compare(const std::vector<VertebralSeries>& series) {
  MorphoReport rep;
  std::vector<double> im, ns;
  for (const auto& s : series) {
    if (s.lengths_mm.size() < 2) {
      rep.skipped.push_back(s.species);
      continue;
    }
    const double d = max_neighbor_diff(normalize(s));
    if (s.group == VertebralSeries::Group::kInertialManeuvering) im.push_back(d);
    else ns.push_back(d);
  }
  if (im.empty() || ns.empty())
    throw Error("morpho_compare: need species in both groups");
  rep.n_inertial = static_cast<int>(im.size());
  rep.n_nonspecialist = static_cast<int>(ns.size());
  rep.mean_inertial = mean(im);
  rep.mean_nonspecialist = mean(ns);
  rep.welch = welch_t_test(im, ns);
  return rep;
}

}  // namespace tailopt
