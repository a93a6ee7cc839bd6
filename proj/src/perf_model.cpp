#include "slbm/perf_model.hpp"

#include <iomanip>
#include <sstream>

#include "slbm/error.hpp"

namespace slbm {

namespace {

void validate(const TrafficModel& m) {
  if (m.b_pdf <= 0 || m.b_idx <= 0) throw ConfigError("byte sizes must be positive");
  if (m.q < 2) throw ConfigError("Q must be at least 2");
}

double pdf_copies(Pattern p) { return p == Pattern::Pull ? 2.0 : 1.0; }

const char* arch_name(Arch a) { return a == Arch::CPU ? "CPU" : "GPU"; }
const char* structure_name(Structure s) { return s == Structure::Dense ? "dense" : "sparse"; }
const char* pattern_name(Pattern p) { return p == Pattern::Pull ? "pull" : "aa"; }

}  // namespace

double bytes_per_cell(const TrafficModel& m) {
  validate(m);
  const double q = m.q;
  double pdf = 2 * q;
  if (m.arch == Arch::CPU && m.pattern == Pattern::Pull) pdf = 3 * q;  // write-allocate
  double idx = 0;
  if (m.structure == Structure::Sparse) idx = m.pattern == Pattern::Pull ? q - 1 : (q - 1) / 2;
  return pdf * m.b_pdf + idx * m.b_idx;
}

double aa_reduction(TrafficModel m) {
  m.pattern = Pattern::Pull;
  const double pull = bytes_per_cell(m);
  m.pattern = Pattern::AA;
  return 1.0 - bytes_per_cell(m) / pull;
}

double memory_total(double n_cells, double phi, const TrafficModel& m, int n_other_fields) {
  validate(m);
  if (phi < 0 || phi > 1) throw ConfigError("porosity must lie in [0, 1]");
  const double q = m.q;
  double per_cell = pdf_copies(m.pattern) * q * m.b_pdf + n_other_fields * m.b_pdf;
  if (m.structure == Structure::Dense) return n_cells * per_cell;
  per_cell += (q - 1) * m.b_idx;
  return n_cells * per_cell * phi;
}

MemoryElements memory_elements(std::uint64_t n_cells, std::uint64_t n_fluid, Structure structure, Pattern pattern,
                               int q, int n_other_fields) {
  MemoryElements e;
  const std::uint64_t copies = pattern == Pattern::Pull ? 2 : 1;
  const std::uint64_t n = structure == Structure::Dense ? n_cells : n_fluid;
  e.pdfs = copies * std::uint64_t(q) * n;
  e.indices = structure == Structure::Sparse ? std::uint64_t(q - 1) * n_fluid : 0;
  e.other = std::uint64_t(n_other_fields) * n;
  return e;
}

double aa_memory_saving(const TrafficModel& m, int n_other_fields) {
  TrafficModel s = m;
  s.structure = Structure::Sparse;
  s.pattern = Pattern::Pull;
  const double pull = memory_total(1.0, 1.0, s, n_other_fields);
  s.pattern = Pattern::AA;
  return 1.0 - memory_total(1.0, 1.0, s, n_other_fields) / pull;
}

double memory_breakeven(const TrafficModel& m, int n_other_fields) {
  TrafficModel d = m, s = m;
  d.structure = Structure::Dense;
  d.pattern = s.pattern = Pattern::Pull;
  s.structure = Structure::Sparse;
  return memory_total(1.0, 1.0, d, n_other_fields) / memory_total(1.0, 1.0, s, n_other_fields);
}

double roofline(double bandwidth_bytes_per_s, const TrafficModel& m) {
  if (bandwidth_bytes_per_s <= 0) throw ConfigError("bandwidth must be positive");
  return bandwidth_bytes_per_s / bytes_per_cell(m);
}

double perf_breakeven(const TrafficModel& dense, const TrafficModel& sparse) {
  if (dense.arch != sparse.arch || dense.pattern != sparse.pattern)
    throw ConfigError("break-even needs models of the same arch and pattern");
  return bytes_per_cell(dense) / bytes_per_cell(sparse);
}

namespace {

struct Row {
  std::string section, arch, structure, pattern, quantity;
  double value;
};

std::vector<Row> report_rows(int q, double b_pdf, double b_idx, double bandwidth) {
  std::vector<Row> rows;
  for (Arch a : {Arch::CPU, Arch::GPU}) {
    for (Structure s : {Structure::Dense, Structure::Sparse}) {
      for (Pattern p : {Pattern::Pull, Pattern::AA}) {
        const TrafficModel m{a, s, p, q, b_pdf, b_idx};
        rows.push_back({"traffic", arch_name(a), structure_name(s), pattern_name(p), "bytes_per_cell", bytes_per_cell(m)});
        rows.push_back({"roofline", arch_name(a), structure_name(s), pattern_name(p), "updates_per_s",
                        roofline(bandwidth, m)});
      }
      const TrafficModel m{a, s, Pattern::Pull, q, b_pdf, b_idx};
      rows.push_back({"traffic", arch_name(a), structure_name(s), "-", "aa_reduction", aa_reduction(m)});
    }
    const TrafficModel d{a, Structure::Dense, Pattern::Pull, q, b_pdf, b_idx};
    const TrafficModel s{a, Structure::Sparse, Pattern::Pull, q, b_pdf, b_idx};
    rows.push_back({"breakeven", arch_name(a), "-", "pull", "perf_porosity", perf_breakeven(d, s)});
  }
  const TrafficModel m{Arch::GPU, Structure::Sparse, Pattern::Pull, q, b_pdf, b_idx};
  for (Structure s : {Structure::Dense, Structure::Sparse})
    for (Pattern p : {Pattern::Pull, Pattern::AA}) {
      const TrafficModel mm{Arch::GPU, s, p, q, b_pdf, b_idx};
      rows.push_back({"memory", "-", structure_name(s), pattern_name(p), "bytes_per_cell_at_phi1",
                      memory_total(1.0, 1.0, mm)});
    }
  rows.push_back({"memory", "-", "sparse", "-", "aa_saving", aa_memory_saving(m)});
  rows.push_back({"breakeven", "-", "-", "pull", "memory_porosity", memory_breakeven(m)});
  return rows;
}

}  // namespace

std::string model_report(int q, double b_pdf, double b_idx, double bandwidth) {
  std::ostringstream os;
  os << "model Q=" << q << " B_pdf=" << b_pdf << " B_idx=" << b_idx << " bandwidth=" << bandwidth << " B/s\n";
  const auto rows = report_rows(q, b_pdf, b_idx, bandwidth);
  for (const char* section : {"traffic", "roofline", "memory", "breakeven"}) {
    os << "\n[" << section << "]\n";
    for (const auto& r : rows) {
      if (r.section != section) continue;
    os << "  " << std::left << std::setw(4) << r.arch << std::setw(7) << r.structure << std::setw(5) << r.pattern
       << std::setw(24) << r.quantity;
    if (r.quantity == "aa_reduction" || r.quantity == "aa_saving")
      os << std::fixed << std::setprecision(1) << 100.0 * r.value << " %";
    else if (r.quantity == "updates_per_s")
      os << std::scientific << std::setprecision(4) << r.value;
    else
      os << std::defaultfloat << std::setprecision(6) << r.value;
    os << std::defaultfloat << '\n';
    }
  }
  return os.str();
}

std::string model_report_csv(int q, double b_pdf, double b_idx, double bandwidth) {
  std::ostringstream os;
  os << "section,arch,structure,pattern,quantity,value\n" << std::setprecision(17);
  for (const auto& r : report_rows(q, b_pdf, b_idx, bandwidth))
    os << r.section << ',' << r.arch << ',' << r.structure << ',' << r.pattern << ',' << r.quantity << ',' << r.value
       << '\n';
  return os.str();
}

}  // namespace slbm
