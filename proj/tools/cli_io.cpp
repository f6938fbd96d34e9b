#include "cli_io.hpp"

#include "cwvote/rng.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace cwvote::cli {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(trim(item));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw InputError("line " + std::to_string(line_no) + ": " + what);
}

template <class T>
T parse_int(const std::string& field, std::size_t line_no, const char* name) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        fail(line_no, std::string("cannot parse ") + name + " '" + field + "'");
    }
    return value;
}

// Reads the header and all data rows as (line number, fields).
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& in,
                                                                        const std::string& header) {
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!seen_header) {
            std::string compact;
            for (char c : t) {
                if (c != ' ' && c != '\t') compact += c;
            }
            if (compact != header) fail(line_no, "expected header '" + header + "'");
            seen_header = true;
            continue;
        }
        auto fields = split_fields(t);
        if (fields.size() != 3) fail(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        rows.emplace_back(line_no, std::move(fields));
    }
    if (!seen_header) throw InputError("empty input: missing header '" + header + "'");
    if (rows.empty()) throw InputError("input has a header but no observations");
    return rows;
}

struct Cell {
    std::size_t line_no;
    std::int64_t margin;
};

VotingSample assemble(const std::map<std::pair<std::size_t, std::size_t>, Cell>& cells,
                      const std::vector<std::int64_t>& sizes) {
    std::size_t n = 0;
    for (const auto& [key, cell] : cells) n = std::max(n, key.first + 1);
    VotingSample s(sizes, n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            const auto it = cells.find({t, g});
            if (it == cells.end()) {
                throw InputError("observation " + std::to_string(t) + ", group " + std::to_string(g) +
                                 " is missing");
            }
            s.set_margin(t, g, it->second.margin);
        }
    }
    return s;
}

} // namespace

VotingSample read_margins_csv(std::istream& in, const std::vector<std::int64_t>& group_sizes) {
    if (group_sizes.empty()) throw InputError("group sizes are required to read margins");
    for (auto n : group_sizes) {
        if (n < 1) throw InputError("group sizes must be >= 1");
    }
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
    for (const auto& [line_no, f] : read_rows(in, "obs,group,margin")) {
        const auto obs = parse_int<std::size_t>(f[0], line_no, "obs");
        const auto group = parse_int<std::size_t>(f[1], line_no, "group");
        const auto margin = parse_int<std::int64_t>(f[2], line_no, "margin");
        if (group >= group_sizes.size()) {
            fail(line_no, "group " + std::to_string(group) + " out of range (M = " +
                              std::to_string(group_sizes.size()) + ")");
        }
        const auto n = group_sizes[group];
        if (margin < -n || margin > n || ((margin + n) % 2) != 0) {
            fail(line_no, "margin " + std::to_string(margin) + " impossible for group size " + std::to_string(n));
        }
        if (!cells.emplace(std::pair{obs, group}, Cell{line_no, margin}).second) {
            fail(line_no, "duplicate entry for observation " + std::to_string(obs) + ", group " +
                              std::to_string(group));
        }
    }
    return assemble(cells, group_sizes);
}

void write_margins_csv(std::ostream& out, const VotingSample& sample) {
    out << "obs,group,margin\n";
    for (std::size_t t = 0; t < sample.observations(); ++t) {
        for (std::size_t g = 0; g < sample.groups(); ++g) {
            out << t << ',' << g << ',' << sample.margin(t, g) << '\n';
        }
    }
}

VotingSample read_spins_csv(std::istream& in) {
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
    std::map<std::size_t, std::int64_t> sizes;
    for (const auto& [line_no, f] : read_rows(in, "obs,group,spins")) {
        const auto obs = parse_int<std::size_t>(f[0], line_no, "obs");
        const auto group = parse_int<std::size_t>(f[1], line_no, "group");
        const std::string& spins = f[2];
        if (spins.empty()) fail(line_no, "empty spin string");
        std::int64_t margin = 0;
        for (char c : spins) {
            if (c == '+') {
                ++margin;
            } else if (c == '-') {
                --margin;
            } else {
                fail(line_no, std::string("spin strings may only contain '+' and '-', found '") + c + "'");
            }
        }
        const auto n = static_cast<std::int64_t>(spins.size());
        const auto [it, inserted] = sizes.emplace(group, n);
        if (!inserted && it->second != n) {
            fail(line_no, "group " + std::to_string(group) + " has " + std::to_string(n) +
                              " voters here but " + std::to_string(it->second) + " elsewhere");
        }
        if (!cells.emplace(std::pair{obs, group}, Cell{line_no, margin}).second) {
            fail(line_no, "duplicate entry for observation " + std::to_string(obs) + ", group " +
                              std::to_string(group));
        }
    }
    std::vector<std::int64_t> group_sizes;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        const auto it = sizes.find(g);
        if (it == sizes.end()) throw InputError("group " + std::to_string(g) + " never appears");
        group_sizes.push_back(it->second);
    }
    return assemble(cells, group_sizes);
}

void write_spins_csv(std::ostream& out, const VotingSample& sample, std::uint64_t seed) {
    out << "obs,group,spins\n";
    const auto& sizes = sample.group_sizes();
    for (std::size_t t = 0; t < sample.observations(); ++t) {
        for (std::size_t g = 0; g < sample.groups(); ++g) {
            const auto spins = materialize_spins(sample.margin(t, g), sizes[g],
                                                 derive_seed(seed, t * sample.groups() + g));
            std::string s(spins.size(), '-');
            for (std::size_t i = 0; i < spins.size(); ++i) {
                if (spins[i] > 0) s[i] = '+';
            }
            out << t << ',' << g << ',' << s << '\n';
        }
    }
}

VotingSample read_sample_file(const std::string& path, const std::string& format,
                              const std::vector<std::int64_t>& group_sizes) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        if (format == "margins") return read_margins_csv(in, group_sizes);
        if (format == "spins") return read_spins_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
    throw InputError("unknown input format '" + format + "' (expected margins or spins)");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << contents;
    if (!out) throw InputError("error while writing '" + path + "'");
}

} // namespace cwvote::cli
