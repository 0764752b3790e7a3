#ifndef EEGFEAT_CSV_HPP
#define EEGFEAT_CSV_HPP

#include "eegfeat/types.hpp"

#include <string>
#include <string_view>

namespace eegfeat {

// Parse a comma-separated recording: header row of channel names, then one
// time sample per row. The sample rate is not stored in CSV and must be
// supplied by the caller.
Recording parse_csv(std::string_view text, double sample_rate, const std::string& source_path = "");

Recording read_csv(const std::string& path, double sample_rate);

// Writes a recording in the same layout (used by the synth command).
void write_csv(const Recording& rec, const std::string& path);

} // namespace eegfeat

#endif
