#include "mwave/io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mwave::io {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "raw files are little-endian");

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

namespace {

void write_raw(const std::string& path, std::span<const double> values) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size_bytes()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::vector<double> read_raw(const std::string& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(double)));
  if (in.gcount() != std::streamsize(count * sizeof(double)) || in.peek() != EOF)
    throw std::runtime_error("size mismatch in " + path);
  return v;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

json box_json(const SupportBox& b) { return {{"i0", b.i0}, {"i1", b.i1}, {"j0", b.j0}, {"j1", b.j1}}; }

}  // namespace

void write_field(const std::string& stem, const ScalarField& f, const std::string& role) {
  const auto& g = *f.grid();
  json meta = {{"n", g.n()},
               {"h", g.h()},
               {"pad", g.pad()},
               {"extent", f.extent() == Extent::Domain ? "domain" : "padded"},
               {"role", role}};
  const SupportBox box = f.support() ? *f.support() : f.nonzero_box();
  meta["support_box"] = box.empty() ? json(nullptr) : box_json(box);
  write_raw(stem + ".f64", f.values());
  write_text(stem + ".json", meta.dump(2) + "\n");
}

ScalarField read_field(const std::string& stem) {
  const json meta = read_json(stem + ".json");
  auto grid = Grid::with_padding(meta.at("n").get<int>(), meta.at("pad").get<int>());
  const Extent ext = meta.at("extent").get<std::string>() == "padded" ? Extent::Padded : Extent::Domain;
  const std::size_t count = ext == Extent::Domain ? grid->domain_size() : grid->padded_size();
  return ScalarField(grid, ext, read_raw(stem + ".f64", count));
}

void write_trace(const std::string& stem, const BoundaryTrace& tr) {
  const auto& g = *tr.grid();
  const auto& tg = tr.time_grid();
  json nodes = json::array();
  for (auto q : g.boundary_idx()) {
    const int i = int(q % g.n()), j = int(q / g.n());
    nodes.push_back({g.x(i), g.y(j)});
  }
  const json meta = {{"T", tg.T}, {"nt", tg.nt}, {"dt", tg.dt}, {"n", g.n()}, {"pad", g.pad()},
                     {"boundary_nodes", nodes}};
  write_raw(stem + ".f64", tr.values());
  write_text(stem + ".json", meta.dump(2) + "\n");
}

BoundaryTrace read_trace(const std::string& stem) {
  const json meta = read_json(stem + ".json");
  auto grid = Grid::with_padding(meta.at("n").get<int>(), meta.at("pad").get<int>());
  BoundaryTrace tr(grid, TimeGrid::with_steps(meta.at("T").get<double>(), meta.at("nt").get<int>()));
  const auto v = read_raw(stem + ".f64", tr.values().size());
  std::copy(v.begin(), v.end(), tr.values().begin());
  return tr;
}

void write_kernel_pair(const std::string& stem, const KernelPair& kp, const std::string& base_point_id) {
  write_field(stem + "_delta_f", kp.pert.delta_f, "delta_f");
  write_field(stem + "_delta_c2", kp.pert.delta_c2, "delta_c2");
  const json meta = {{"N", kp.N}, {"residual", kp.residual}, {"base_point_id", base_point_id}, {"log", kp.log}};
  write_text(stem + ".json", meta.dump(2) + "\n");
}

void write_identities_json(const std::string& path, const std::array<OperatorResidualReport, 4>& reports,
                           const LeftInverseReport* left) {
  json out;
  out["identities"] = json::array();
  for (const auto& r : reports)
    out["identities"].push_back({{"identity_id", to_string(r.identity_id)},
                                 {"residual", r.relative_residual},
                                 {"n", r.n},
                                 {"nt", r.nt},
                                 {"f_description", r.f_description}});
  if (left)
    out["left_inverse"] = {{"B1_L1_minus_id", left->b1_l1},
                           {"B2_L1", left->b2_l1},
                           {"B1_L2", left->b1_l2},
                           {"B2_L2_minus_id", left->b2_l2}};
  write_text(path, out.dump(2) + "\n");
}

void write_neumann_csv(const std::string& path, const NeumannReport& rep) {
  std::ostringstream os;
  os << "iteration,increment_norm,error_if_known\n";
  for (std::size_t m = 0; m < rep.increment_norms.size(); ++m) {
    os << m << ',' << format_double(rep.increment_norms[m]) << ',';
    if (m < rep.errors.size()) os << format_double(rep.errors[m]);
    os << '\n';
  }
  write_text(path, os.str());
}

void write_decay_csv(const std::string& path, const DecayReport& rep) {
  std::ostringstream os;
  os << "lambda,input_norm,output_norm,ratio\n";
  for (const auto& r : rep.rows)
    os << format_double(r.lambda) << ',' << format_double(r.input_norm) << ',' << format_double(r.output_norm)
       << ',' << format_double(r.ratio) << '\n';
  write_text(path, os.str());
}

void write_spectrum_csv(const std::string& path, const SpectrumReport& rep) {
  std::ostringstream os;
  os << "k,sigma,sigma_normalized,subspace_id\n";
  for (std::size_t k = 0; k < rep.sigma.size(); ++k)
    os << k + 1 << ',' << format_double(rep.sigma[k]) << ',' << format_double(rep.sigma_normalized[k]) << ','
       << rep.subspace_id << '\n';
  write_text(path, os.str());
}

}  // namespace mwave::io
