#ifndef EEGFEAT_WINDOWING_HPP
#define EEGFEAT_WINDOWING_HPP

#include "eegfeat/types.hpp"

namespace eegfeat {

// Split a recording into n_w = floor((T-h)/(w-h)) windows of w samples with
// h samples of overlap. Trailing samples that do not fill a window are
// dropped. The recording's label/meta is copied to every window.
WindowSet window(const Recording& rec, int window_len, int overlap);

// Append the windows of `extra` to `dst`. Window geometry must match.
void append_windows(WindowSet& dst, const WindowSet& extra);

} // namespace eegfeat

#endif
