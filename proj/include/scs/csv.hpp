// CSV ingestion with a configurable column map. Strict by design: header
// required, comma-delimited, '.' decimal point, no missing values.
#pragma once

#include <string>
#include <vector>

#include "scs/types.hpp"

namespace scs {

// Maps dataset roles onto column names. When `features` is empty every
// column not claimed by time/event/treatment becomes a feature, in header
// order.
struct CsvSchema {
    std::string time = "time";
    std::string event = "event";
    std::string treatment = "treatment";
    std::vector<std::string> features;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const std::string& path, const Dataset& ds, const CsvSchema& schema = {});

}  // namespace scs
