#include "qwloc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qwloc {

Json permutation_to_json(const Permutation& pi) { return Json(pi.images()); }

Permutation permutation_from_json(const Json& j, int d) {
  if (!j.is_array()) throw std::invalid_argument("permutation: expected a JSON array");
  std::vector<int> images;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw std::invalid_argument("permutation: entries must be integers");
    images.push_back(v.get<int>());
  }
  return Permutation(d, std::move(images));
}

Json coin_to_json(const CoinMatrix& coin) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < coin.rows(); ++r) {
    for (Eigen::Index c = 0; c < coin.cols(); ++c) {
      rows.push_back(Json::array({coin(r, c).real(), coin(r, c).imag()}));
    }
  }
  return rows;
}

CoinMatrix coin_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("coin: expected a JSON array");
  const auto total = static_cast<Eigen::Index>(j.size());
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(total))));
  if (n * n != total) throw std::invalid_argument("coin: entry count is not a perfect square");
  CoinMatrix m(n, n);
  for (Eigen::Index k = 0; k < total; ++k) {
    const auto& e = j[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("coin: entries must be [re, im] pairs");
    m(k / n, k % n) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return m;
}

Json distribution_to_json(const PhaseDistribution& dist) {
  Json j;
  if (dist.is_zero()) {
    j["type"] = "zero";
  } else if (dist.is_uniform()) {
    j["type"] = "uniform";
  } else {
    j["type"] = "table";
    j["values"] = dist.table();
  }
  return j;
}

PhaseDistribution distribution_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("distribution: expected {\"type\": ...}");
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform") {
    if (j.size() != 1) throw std::invalid_argument("distribution: unknown keys for uniform");
    return PhaseDistribution::uniform();
  }
  if (type == "zero") {
    if (j.size() != 1) throw std::invalid_argument("distribution: unknown keys for zero");
    return PhaseDistribution::zero_phases();
  }
  if (type == "table") {
    if (j.size() != 2 || !j.contains("values"))
      throw std::invalid_argument("distribution: table needs exactly {type, values}");
    return PhaseDistribution::tabulated(j.at("values").get<std::vector<double>>());
  }
  throw std::invalid_argument("distribution: unknown type '" + type + "'");
}

Json blocks_to_json(const std::vector<InvariantBlock>& blocks, int d) {
  Json out = Json::array();
  for (const auto& b : blocks) {
    Json jb;
    jb["anchor_tau"] = b.anchor_tau;
    Json site = Json::array();
    for (int i = 0; i < d; ++i) site.push_back(b.anchor_site[i]);
    jb["anchor_site"] = site;
    Json members = Json::array();
    for (const auto& m : b.members) {
      Json jm;
      jm["tau"] = m.tau;
      Json ms = Json::array();
      for (int i = 0; i < d; ++i) ms.push_back(m.site[i]);
      jm["site"] = ms;
      members.push_back(jm);
    }
    jb["members"] = members;
    out.push_back(jb);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

std::string field_csv(const PhaseField& field) {
  std::ostringstream out;
  const int d = field.dim();
  for (int i = 0; i < d; ++i) out << "y_" << (i + 1) << ",";
  out << "tau,theta\n";
  const auto& region = field.region();
  for (std::int64_t si = 0; si < region.site_count(); ++si) {
    const Site s = region.site_at(si);
    for (int c = 0; c < 2 * d; ++c) {
      const int tau = coin_from_code(c, d);
      for (int i = 0; i < d; ++i) out << s[i] << ",";
      out << tau << "," << format_double(field.phase(s, tau)) << "\n";
    }
  }
  return out.str();
}

std::string triplets_csv(const SparseOp& op) {
  std::ostringstream out;
  out << "row,col,re,im\n";
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(op, k); it; ++it) {
      out << it.row() << "," << it.col() << "," << format_double(it.value().real()) << ","
          << format_double(it.value().imag()) << "\n";
    }
  }
  return out.str();
}

std::string spectrum_csv(const SpectrumResult& spectrum) {
  std::ostringstream out;
  out << "index,re,im,residual\n";
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
    out << i << "," << format_double(spectrum.eigenvalues(i).real()) << ","
        << format_double(spectrum.eigenvalues(i).imag()) << ","
        << format_double(spectrum.residuals(i)) << "\n";
  }
  return out.str();
}

std::string dispersion_csv(const DispersionResult& disp) {
  std::ostringstream out;
  for (int i = 0; i < disp.d; ++i) out << "k_" << (i + 1) << ",";
  out << "band,re,im\n";
  for (std::size_t g = 0; g < disp.kpoints.size(); ++g) {
    for (Eigen::Index b = 0; b < disp.bands.cols(); ++b) {
      for (int i = 0; i < disp.d; ++i)
        out << format_double(disp.kpoints[g][static_cast<std::size_t>(i)]) << ",";
      out << b << "," << format_double(disp.bands(static_cast<Eigen::Index>(g), b).real()) << ","
          << format_double(disp.bands(static_cast<Eigen::Index>(g), b).imag()) << "\n";
    }
  }
  return out.str();
}

std::string traces_csv(const std::vector<MomentTrace>& traces) {
  std::ostringstream out;
  out << "realization,n,p,moment\n";
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const auto& tr = traces[r];
    for (std::size_t t = 0; t < tr.times.size(); ++t) {
      for (std::size_t pi = 0; pi < tr.p_list.size(); ++pi) {
        out << r << "," << tr.times[t] << "," << format_double(tr.p_list[pi]) << ","
            << format_double(tr.moments[t][pi]) << "\n";
      }
    }
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace qwloc
