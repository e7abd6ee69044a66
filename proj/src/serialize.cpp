#include "tentlab/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace tentlab {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

Json space_to_json(const SpaceGrid& sp) {
  Json j;
  if (sp.is_torus()) {
    j["kind"] = "torus";
    j["dims"] = sp.dims();
    j["sides"] = sp.sides();
    j["cell"] = sp.cell();
    j["n"] = sp.doubling_exponent();
    j["n0"] = sp.points();
    return j;
  }
  j["kind"] = "graph";
  j["vertices"] = sp.points();
  Json edges = Json::array();
  for (const auto& e : sp.edges()) edges.push_back({{"u", e.u}, {"v", e.v}, {"len", e.length}});
  j["edges"] = edges;
  std::vector<double> mu(sp.points());
  for (int i = 0; i < sp.points(); ++i) mu[i] = sp.measure(i);
  j["measures"] = mu;
  return j;
}

std::shared_ptr<const SpaceGrid> space_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "torus") {
    const auto sides = j.at("sides").get<std::vector<int>>();
    if (sides.empty()) throw std::invalid_argument("space_from_json: empty sides");
    const double cell = j.contains("cell") ? j.at("cell").get<double>() : 1.0 / sides[0];
    return SpaceGrid::torus(sides, cell);
  }
  if (kind == "graph") {
    const int nv = j.at("vertices").get<int>();
    std::vector<SpaceGrid::GraphEdge> edges;
    for (const auto& e : j.at("edges")) {
      SpaceGrid::GraphEdge ge;
      ge.u = e.at("u").get<int>();
      ge.v = e.at("v").get<int>();
      ge.length = e.at("len").get<double>();
      edges.push_back(ge);
    }
    const auto mu = j.at("measures").get<std::vector<double>>();
    if (static_cast<int>(mu.size()) != nv)
      throw std::invalid_argument("space_from_json: measures size mismatch");
    Eigen::VectorXd m(nv);
    for (int i = 0; i < nv; ++i) m[i] = mu[i];
    return SpaceGrid::graph(nv, std::move(edges), std::move(m));
  }
  throw std::invalid_argument("space_from_json: unknown kind '" + kind + "'");
}

Json ball_to_json(const Ball& b) { return Json{{"center", b.center}, {"radius", b.radius}}; }

Json region_to_json(const Region& R) {
  Json pairs = Json::array();
  for (const auto& [point, level] : R.sorted_nodes()) pairs.push_back({point, level});
  return Json{{"nodes", pairs}};
}

Json gamma_to_json(const GammaEstimate& e) {
  return Json{{"value", e.value},
              {"stderr", e.stderr_},
              {"method", e.method},
              {"samples", e.samples},
              {"seed", e.seed}};
}

Json tent_report_to_json(const TentNormReport& r) {
  Json j{{"p", r.p},       {"alpha", r.alpha},     {"value", r.value},
         {"method", r.method}, {"samples", r.samples}, {"seed", r.seed}};
  if (r.best_center >= 0) {
    j["best_center"] = r.best_center;
    j["best_radius"] = r.best_radius;
  }
  return j;
}

namespace {

// Node-value pairs of a tent function: [point, level, [coords...]].
Json tent_values_to_json(const TentFunction<double>& a) {
  Json nodes = Json::array();
  const auto& hg = a.grid();
  for (const auto& [point, level] : a.support().sorted_nodes()) {
    const auto row = a.values().row(hg.node(point, level));
    std::vector<double> vals(row.size());
    for (int c = 0; c < row.size(); ++c) vals[c] = row[c];
    nodes.push_back({point, level, vals});
  }
  return nodes;
}

Json matrix_columns_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int x = 0; x < m.rows(); ++x) {
    std::vector<double> vals(m.cols());
    for (int c = 0; c < m.cols(); ++c) vals[c] = m(x, c);
    rows.push_back(vals);
  }
  return rows;
}

}  // namespace

Json decomposition_to_json(const Decomposition& dec) {
  Json atoms = Json::array();
  for (size_t k = 0; k < dec.atoms.size(); ++k) {
    const auto& a = dec.atoms[k];
    atoms.push_back({{"lambda", dec.lambdas[k]},
                     {"lambda_literal", a.lambda_literal},
                     {"ball", ball_to_json(a.ball)},
                     {"nodes", tent_values_to_json(a.a)}});
  }
  return Json{{"atoms", atoms},
              {"diagnostics",
               {{"lambda_sum", dec.lambda_sum},
                {"t1_norm", dec.t1_norm},
                {"reconstruction_residual", dec.reconstruction_residual},
                {"level_count", dec.level_count},
                {"kmin", dec.kmin},
                {"kmax", dec.kmax}}}};
}

Json l_atom_to_json(const LAtom& atom) {
  const auto& d = atom.diag;
  std::vector<double> sizes(d.size_values.data(), d.size_values.data() + d.size_values.size());
  return Json{{"order", atom.order},
              {"ball", ball_to_json(atom.ball)},
              {"m", matrix_columns_to_json(atom.m)},
              {"witness", matrix_columns_to_json(atom.witness)},
              {"diagnostics",
               {{"lk_residual", d.lk_residual},
                {"support_leakage", d.support_leakage},
                {"support_flagged", d.support_flagged},
                {"leak_threshold", d.leak_threshold},
                {"size_values", sizes},
                {"size_bound", d.size_bound},
                {"normalizer", d.normalizer},
                {"mean_abs", d.mean_abs}}}};
}

Json classical_atom_to_json(const ClassicalAtom& atom) {
  return Json{{"ball", ball_to_json(atom.ball)}, {"m", matrix_columns_to_json(atom.m)}};
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("CsvTable: row width does not match the columns");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
  return out.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const Json& canonical) {
  const std::uint64_t h = fnv1a(canonical.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_text_file: cannot open '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write_text_file: write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tentlab
