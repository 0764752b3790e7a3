#ifndef EEGFEAT_EDF_HPP
#define EEGFEAT_EDF_HPP

#include "eegfeat/types.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace eegfeat {

// Parse a European Data Format (EDF) byte stream: 256-byte ASCII header,
// one 256-byte header block per signal (field-major), then data records of
// 16-bit little-endian two's-complement samples. Samples are rescaled to
// physical units via each signal's (physical_min, physical_max,
// digital_min, digital_max) affine map. "EDF Annotations" channels are
// dropped. All retained signals must share one sampling rate. A record
// count of -1 (streaming convention) is inferred from the file length.
Recording parse_edf(std::span<const unsigned char> bytes, const std::string& source_path = "");

// Read and parse an EDF file from disk.
Recording read_edf(const std::string& path);

} // namespace eegfeat

#endif
