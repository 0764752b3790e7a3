#include "eegfeat/windowing.hpp"

#include "eegfeat/error.hpp"

#include <set>
#include <string>

namespace eegfeat {

void Recording::validate() const {
    if (channels() < 2) throw ParamError("recording must have at least 2 channels, got " + std::to_string(channels()));
    if (length() < 1) throw ParamError("recording has no samples");
    if (!(sample_rate > 0.0)) throw ParamError("sample rate must be positive");
    if (static_cast<Eigen::Index>(channel_names.size()) != channels())
        throw ParamError("channel name count (" + std::to_string(channel_names.size()) +
                         ") does not match channel count (" + std::to_string(channels()) + ")");
    std::set<std::string> seen;
    for (const auto& name : channel_names)
        if (!seen.insert(name).second) throw ParamError("duplicate channel name '" + name + "'");
}

WindowSet window(const Recording& rec, int window_len, int overlap) {
    const auto t = rec.length();
    if (window_len <= 0) throw ParamError("window length must be positive");
    if (overlap < 0 || overlap >= window_len)
        throw ParamError("overlap must satisfy 0 <= h < w");
    if (window_len > t)
        throw ParamError("window of " + std::to_string(window_len) + " samples is longer than recording (" +
                         std::to_string(t) + " samples); no windows can be formed");

    const int step = window_len - overlap;
    const auto n_w = (t - overlap) / step; // floor((T-h)/(w-h))

    WindowSet ws;
    ws.window_len = window_len;
    ws.overlap = overlap;
    ws.windows.reserve(static_cast<std::size_t>(n_w));
    ws.provenance.reserve(static_cast<std::size_t>(n_w));
    if (rec.meta.label.has_value()) ws.labels.reserve(static_cast<std::size_t>(n_w));
    for (Eigen::Index k = 0; k < n_w; ++k) {
        ws.windows.emplace_back(rec.samples.middleCols(k * step, window_len));
        ws.provenance.push_back(rec.meta);
        if (rec.meta.label.has_value()) ws.labels.push_back(*rec.meta.label);
    }
    return ws;
}

void append_windows(WindowSet& dst, const WindowSet& extra) {
    if (dst.windows.empty()) {
        dst = extra;
        return;
    }
    if (dst.window_len != extra.window_len || dst.overlap != extra.overlap)
        throw ShapeError("cannot pool window sets with different window geometry");
    if (dst.labels.empty() != extra.labels.empty())
        throw ShapeError("cannot pool labeled and unlabeled window sets");
    dst.windows.insert(dst.windows.end(), extra.windows.begin(), extra.windows.end());
    dst.labels.insert(dst.labels.end(), extra.labels.begin(), extra.labels.end());
    dst.provenance.insert(dst.provenance.end(), extra.provenance.begin(), extra.provenance.end());
}

} // namespace eegfeat
