#pragma once

#include <string>
#include <vector>

#include "hetpde/grid.hpp"

namespace hetpde {

// All writers go through a temp-file plus rename, so readers never observe a
// partially written artifact.
void write_text_atomic(const std::string& path, const std::string& content);

// One CSV row per grid row, comma separated, '.' decimal separator, %.17g.
void write_field_csv(const std::string& path, const ScalarField& u);

// Inverse of write_field_csv. The spacing is not stored in the CSV and has to
// be supplied by the caller.
ScalarField read_field_csv(const std::string& path, double spacing = 1.0);

// 16-bit grayscale PNG, values mapped affinely from [min, max] onto
// [0, 65535]. The mapping is recorded in "<path>.txt".
void write_field_png16(const std::string& path, const ScalarField& u);

// Rows "index,value".
void write_trace_csv(const std::string& path, const std::vector<double>& trace);

}
