#pragma once

// File formats of the command-line tool.
//
// Margins CSV (long format):  obs,group,margin   one row per (obs, group)
// Raw spins CSV:              obs,group,spins    spins written as +/- strings

#include "cwvote/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwvote::cli {

// Malformed or inconsistent input. Maps to exit code 4.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

VotingSample read_margins_csv(std::istream& in, const std::vector<std::int64_t>& group_sizes);
void write_margins_csv(std::ostream& out, const VotingSample& sample);

// Group sizes are read off the spin strings; each row is reduced to its margin.
VotingSample read_spins_csv(std::istream& in);
// Spin configurations uniform given each margin, seeded per (obs, group).
void write_spins_csv(std::ostream& out, const VotingSample& sample, std::uint64_t seed);

VotingSample read_sample_file(const std::string& path, const std::string& format,
                              const std::vector<std::int64_t>& group_sizes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

} // namespace cwvote::cli
