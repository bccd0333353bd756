#pragma once

#include <string>
#include <vector>

#include "qconv/csvio.hpp"

namespace qconv {

// Standalone SVG with one log-scale sup_error curve per input CSV plus their
// pointwise median. All CSVs must share the header and the t column; an empty
// list or any disagreement throws SchemaMismatch.
void emit_convergence_plot(const std::vector<CsvTable>& tables,
                           const std::string& out_path);

void emit_convergence_plot_files(const std::vector<std::string>& csv_paths,
                                 const std::string& out_path);

} // namespace qconv
