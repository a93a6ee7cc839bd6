#pragma once

#include <cstdint>
#include <string>

#include "slbm/flag_field.hpp"

namespace slbm {

enum class Arch { CPU, GPU };
enum class Structure { Dense, Sparse };

struct TrafficModel {
  Arch arch = Arch::GPU;
  Structure structure = Structure::Sparse;
  Pattern pattern = Pattern::Pull;
  int q = 19;
  double b_pdf = 8.0;
  double b_idx = 4.0;
};

/// Bytes moved per cell update. CPU pull includes the write-allocate read.
double bytes_per_cell(const TrafficModel& m);

/// 1 - AA/Pull for the model's arch and structure.
double aa_reduction(TrafficModel m);

/// Memory footprint of the PDF, index and auxiliary fields. Dense ignores phi.
/// `n_other_fields` auxiliary values of B_pdf bytes are counted per cell
/// (velocity 3, density 1, flag 1).
double memory_total(double n_cells, double phi, const TrafficModel& m, int n_other_fields = 5);

/// Element counts behind memory_total, for exact allocation checks.
struct MemoryElements {
  std::uint64_t pdfs = 0;
  std::uint64_t indices = 0;
  std::uint64_t other = 0;
};
MemoryElements memory_elements(std::uint64_t n_cells, std::uint64_t n_fluid, Structure structure, Pattern pattern,
                               int q, int n_other_fields = 5);

/// Relative memory saving of sparse AA over sparse pull.
double aa_memory_saving(const TrafficModel& m, int n_other_fields = 5);

/// Porosity where sparse (pull) and dense memory footprints are equal.
double memory_breakeven(const TrafficModel& m, int n_other_fields = 5);

/// Memory-bound update rate: bandwidth / bytes_per_cell.
double roofline(double bandwidth_bytes_per_s, const TrafficModel& m);

/// Porosity below which sparse outperforms dense: dense throughput in fluid
/// updates scales with phi, sparse stays constant.
double perf_breakeven(const TrafficModel& dense, const TrafficModel& sparse);

/// Plain-text report: traffic tables, reductions, memory, rooflines, break-evens.
std::string model_report(int q, double b_pdf, double b_idx, double bandwidth);
/// Same content as CSV (section,arch,structure,pattern,quantity,value).
std::string model_report_csv(int q, double b_pdf, double b_idx, double bandwidth);

}  // namespace slbm
