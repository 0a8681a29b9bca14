#include "snnot/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "snnot/errors.hpp"

namespace snnot {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::optional<std::size_t> column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name) return i;
    return std::nullopt;
}

struct Row {
    Date date;
    std::optional<double> count;
    int line;
};

}  // namespace

const char* to_string(Measure m) noexcept { return m == Measure::cases ? "cases" : "deaths"; }

Measure parse_measure(std::string_view s) {
    if (s == "cases") return Measure::cases;
    if (s == "deaths") return Measure::deaths;
    throw ArgumentError("measure must be cases or deaths, got '" + std::string(s) + "'");
}

Date parse_date(std::string_view s) {
    s = trim(s);
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string str(s);
    if (s.size() != 10 || std::sscanf(str.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw ArgumentError("not an ISO date: '" + str + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ArgumentError("not a calendar date: '" + str + "'");
    return Date(ymd);
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r' && c != '\n') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

AnalysisInput ingest_csv(std::istream& in, const IngestOptions& opts) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    const auto c_date = column(header, "date");
    const auto c_loc = column(header, "location");
    const auto c_val = column(header, opts.measure == Measure::cases ? "total_cases" : "total_deaths");
    if (!c_date || !c_loc || !c_val) {
        throw IoError("CSV must have columns date, location and total_" + std::string(to_string(opts.measure)));
    }
    const std::size_t need = std::max({*c_date, *c_loc, *c_val}) + 1;

    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < need) throw IoError("line " + std::to_string(lineno) + ": too few fields");
        if (trim(f[*c_loc]) != opts.country) continue;
        const Date d = parse_date(f[*c_date]);
        if (opts.end_date && d > *opts.end_date) continue;
        std::optional<double> v;
        if (!trim(f[*c_val]).empty()) {
            v = parse_number(f[*c_val]);
            if (!v || *v < 0.0) throw IoError("line " + std::to_string(lineno) + ": bad count '" + f[*c_val] + "'");
        }
        if (!rows.empty() && d <= rows.back().date) {
            throw IoError("line " + std::to_string(lineno) + ": dates for " + opts.country + " not increasing");
        }
        rows.push_back({d, v, lineno});
    }
    if (rows.empty()) throw NotFoundError("no rows for location '" + opts.country + "'");

    std::size_t first = 0;
    while (first < rows.size() && !(rows[first].count && *rows[first].count > opts.threshold)) ++first;
    if (first == rows.size()) {
        throw NotFoundError("count for '" + opts.country + "' never exceeds " + std::to_string(opts.threshold));
    }

    AnalysisInput out;
    out.country = opts.country;
    out.measure = opts.measure;
    out.threshold = opts.threshold;
    out.start_date = rows[first].date;
    std::vector<double> logs;
    std::vector<Date> labels;
    auto push = [&](Date d, double count, bool filled) {
        out.counts.push_back(count);
        logs.push_back(std::log(count));
        labels.push_back(d);
        if (filled) out.carried_forward.push_back(static_cast<int>(out.counts.size()));
    };
    push(rows[first].date, *rows[first].count, false);
    for (std::size_t i = first + 1; i < rows.size(); ++i) {
        const double prev = out.counts.back();
        for (Date d = labels.back() + std::chrono::days{1}; d < rows[i].date; d += std::chrono::days{1}) {
            push(d, prev, true);
        }
        if (!rows[i].count) {
            push(rows[i].date, prev, true);
            continue;
        }
        const double v = *rows[i].count;
        if (v < prev) {
            out.warnings.push_back(format_date(rows[i].date) + ": count decreased from " + std::to_string(prev) +
                                   " to " + std::to_string(v));
        }
        if (!(v > 0.0)) throw ArgumentError(format_date(rows[i].date) + ": zero count after the start date");
        push(rows[i].date, v, false);
    }
    if (!out.carried_forward.empty()) {
        out.warnings.push_back(std::to_string(out.carried_forward.size()) + " day(s) carried forward");
    }
    out.series = TimeSeries(std::move(logs), std::move(labels));
    return out;
}

AnalysisInput ingest_csv(const std::filesystem::path& path, const IngestOptions& opts) {
    auto in = open(path);
    return ingest_csv(in, opts);
}

void write_processed_csv(std::ostream& out, const AnalysisInput& input) {
    const char* col = input.measure == Measure::cases ? "total_cases" : "total_deaths";
    out << "date,location," << col << '\n';
    const bool comma = input.country.find_first_of(",\"") != std::string::npos;
    std::string loc = input.country;
    if (comma) {
        std::string q = "\"";
        for (char c : loc) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        loc = q + "\"";
    }
    char buf[64];
    for (std::size_t i = 0; i < input.counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", input.counts[i]);
        out << format_date(input.series.label(static_cast<int>(i + 1))) << ',' << loc << ',' << buf << '\n';
    }
}

TimeSeries read_series(std::istream& in) {
    std::vector<double> values;
    std::vector<Date> labels;
    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = split_csv_line(t);
        const std::string_view vfield = f.size() == 1 ? f[0] : f.back();
        const auto v = parse_number(vfield);
        if (!v) {
            if (!any) {  // header
                any = true;
                continue;
            }
            throw IoError("line " + std::to_string(lineno) + ": not a number '" + std::string(vfield) + "'");
        }
        any = true;
        if (f.size() >= 2) {
            try {
                labels.push_back(parse_date(f[0]));
            } catch (const ArgumentError&) {
                // index or other non-date label: ignored
            }
        }
        values.push_back(*v);
    }
    if (values.empty()) throw IoError("series file holds no values");
    if (!labels.empty() && labels.size() != values.size()) throw IoError("dates given on some lines only");
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] <= labels[i - 1]) throw IoError("series dates not increasing");
    return labels.empty() ? TimeSeries(std::move(values)) : TimeSeries(std::move(values), std::move(labels));
}

TimeSeries read_series(const std::filesystem::path& path) {
    auto in = open(path);
    return read_series(in);
}

}  // namespace snnot
