// diag.hpp — process-wide diagnostic sink (default: stderr)

#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <string>
#include <utility>

namespace spinboson {

namespace detail {
inline std::mutex diag_mutex;
inline std::function<void(const std::string&)> diag_handler;
}  // namespace detail

inline void set_diag_handler(std::function<void(const std::string&)> h) {
    std::lock_guard<std::mutex> lock(detail::diag_mutex);
    detail::diag_handler = std::move(h);
}

inline void diag(const std::string& msg) {
    std::lock_guard<std::mutex> lock(detail::diag_mutex);
    if (detail::diag_handler)
        detail::diag_handler(msg);
    else
        std::fprintf(stderr, "[spinboson] %s\n", msg.c_str());
}

}  // namespace spinboson
