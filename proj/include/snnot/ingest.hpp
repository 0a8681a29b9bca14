#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snnot/regression.hpp"

namespace snnot {

enum class Measure { cases, deaths };

const char* to_string(Measure m) noexcept;
Measure parse_measure(std::string_view s);

// YYYY-MM-DD. Throws ArgumentError on anything else.
Date parse_date(std::string_view s);
std::string format_date(Date d);

struct IngestOptions {
    std::string country;
    Measure measure = Measure::deaths;
    double threshold = 20.0;  // series starts at the first count strictly above this
    std::optional<Date> end_date;  // inclusive
};

struct AnalysisInput {
    std::string country;
    Measure measure = Measure::deaths;
    double threshold = 20.0;
    Date start_date{};
    TimeSeries series;  // natural log of the counts, labelled by date
    std::vector<double> counts;
    // 1-based positions whose value was carried forward from the previous day.
    std::vector<int> carried_forward;
    std::vector<std::string> warnings;
};

// Reads the columns date, location, total_cases and total_deaths of a CSV
// with a header row; other columns are ignored. Missing days and empty values
// after the start are filled with the previous count. Decreasing counts are
// kept and reported in warnings.
AnalysisInput ingest_csv(std::istream& in, const IngestOptions& opts);
AnalysisInput ingest_csv(const std::filesystem::path& path, const IngestOptions& opts);

// Writes the processed counts back in the same schema, one row per day.
void write_processed_csv(std::ostream& out, const AnalysisInput& input);

// Plain series file: one value per line, or "label,value" where label is a
// date. Blank lines, lines starting with '#', and a non-numeric header are skipped.
TimeSeries read_series(std::istream& in);
TimeSeries read_series(const std::filesystem::path& path);

// Splits one CSV record, honouring double quotes and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace snnot
