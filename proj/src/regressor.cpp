#include "orthoaugm/regressor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "orthoaugm/errors.hpp"

namespace orthoaugm {

void LagSpec::validate() const {
  if (n_u < 1 || n_y < 1) {
    throw DimensionMismatch("LagSpec: n_u and n_y must be at least 1");
  }
}

std::size_t Dataset::usable_count() const {
  const std::size_t raw = raw_count();
  const std::size_t lagmax = lag.max_lag();
  return raw > lagmax ? raw - lagmax : 0;
}

std::vector<Sample> build_states(const Dataset& ds) {
  ds.lag.validate();
  if (ds.inputs.size() != ds.outputs.size()) {
    throw DimensionMismatch("build_states: inputs and outputs differ in length");
  }
  const std::size_t n = ds.usable_count();
  if (n < 1) {
    throw InsufficientData("build_states: no sample has a complete lag window");
  }
  const std::size_t first = ds.lag.max_lag();
  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t k = first; k < ds.raw_count(); ++k) {
    Sample s;
    s.x.reserve(ds.lag.state_dim());
    for (std::size_t j = 1; j <= ds.lag.n_a; ++j) {
      const Vector& y = ds.outputs[k - j];
      s.x.insert(s.x.end(), y.begin(), y.end());
    }
    for (std::size_t j = 0; j <= ds.lag.n_b; ++j) {
      const Vector& u = ds.inputs[k - j];
      s.x.insert(s.x.end(), u.begin(), u.end());
    }
    s.y = ds.outputs[k];
    samples.push_back(std::move(s));
  }
  return samples;
}

double Feature::eval(const Vector& x) const {
  if (constant) return 1.0;
  if (coord >= x.size()) {
    throw DimensionMismatch("Feature: coordinate " + std::to_string(coord) +
                            " out of range for state of dimension " + std::to_string(x.size()));
  }
  const double v = x[coord];
  double r = v;
  for (int p = 1; p < power; ++p) r *= v;
  return r;
}

std::vector<std::string> BaselineBasis::names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const Feature& f : features) out.push_back(f.name);
  return out;
}

Matrix BaselineBasis::eval(const Vector& x) const {
  Matrix phi(n_outputs, features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    phi(output_map[j], j) = features[j].eval(x);
  }
  return phi;
}

namespace {

Feature parse_feature(const std::string& name, const LagSpec& lag) {
  Feature f;
  f.name = name;
  if (name == "1") {
    f.constant = true;
    return f;
  }
  std::string base = name;
  f.power = 1;
  const auto caret = name.find('^');
  if (caret != std::string::npos) {
    base = name.substr(0, caret);
    f.power = std::stoi(name.substr(caret + 1));
    if (f.power < 1) throw DimensionMismatch("basis: power must be >= 1 in '" + name + "'");
  }
  if (base == "u") {
    f.coord = lag.n_a * lag.n_y;  // newest input, first channel
  } else if (base.size() > 1 && base[0] == 'y') {
    const std::size_t j = static_cast<std::size_t>(std::stoul(base.substr(1)));
    if (j < 1 || j > lag.n_a) {
      throw DimensionMismatch("basis: output lag out of range in '" + name + "'");
    }
    f.coord = (j - 1) * lag.n_y;
  } else if (base.size() > 1 && base[0] == 'x') {
    f.coord = static_cast<std::size_t>(std::stoul(base.substr(1)));
    if (f.coord >= lag.state_dim()) {
      throw DimensionMismatch("basis: coordinate out of range in '" + name + "'");
    }
  } else {
    throw DimensionMismatch("basis: unknown feature '" + name + "'");
  }
  return f;
}

}  // namespace

BaselineBasis BaselineBasis::parse(const std::vector<std::string>& names, const LagSpec& lag) {
  if (names.empty()) throw DimensionMismatch("basis: empty feature list");
  BaselineBasis basis;
  basis.n_outputs = lag.n_y;
  for (const std::string& name : names) basis.features.push_back(parse_feature(name, lag));
  basis.output_map.assign(basis.features.size(), 0);
  return basis;
}

Matrix assemble_phi(const BaselineBasis& basis, const std::vector<Sample>& states) {
  if (states.empty()) throw InsufficientData("assemble_phi: empty state sequence");
  const std::size_t n_y = basis.n_outputs;
  const std::size_t n_theta = basis.n_theta_b();
  Matrix phi(states.size() * n_y, n_theta);
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (std::size_t j = 0; j < n_theta; ++j) {
      const double v = basis.features[j].eval(states[k].x);
      if (!std::isfinite(v)) {
        throw NonFinite("assemble_phi: feature '" + basis.features[j].name +
                        "' is not finite at sample " + std::to_string(k));
      }
      phi(k * n_y + basis.output_map[j], j) = v;
    }
  }
  return phi;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << "k";
  for (std::size_t i = 0; i < ds.lag.n_u; ++i) out << ",u_" << i;
  for (std::size_t i = 0; i < ds.lag.n_y; ++i) out << ",y_" << i;
  out << "\n";
  for (std::size_t k = 0; k < ds.raw_count(); ++k) {
    out << k;
    for (double v : ds.inputs[k]) out << "," << format_g17(v);
    for (double v : ds.outputs[k]) out << "," << format_g17(v);
    out << "\n";
  }
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path, const LagSpec& lag) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  Dataset ds;
  ds.lag = lag;
  std::string line;
  if (!std::getline(in, line)) throw std::ios_base::failure("empty dataset file " + path.string());
  const std::size_t want = 1 + lag.n_u + lag.n_y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != want) {
      throw std::ios_base::failure("dataset row has " + std::to_string(vals.size()) +
                                   " columns, expected " + std::to_string(want));
    }
    ds.inputs.push_back(Vector(vals.begin() + 1, vals.begin() + 1 + lag.n_u));
    ds.outputs.push_back(Vector(vals.begin() + 1 + lag.n_u, vals.end()));
  }
  return ds;
}

}  // namespace orthoaugm
