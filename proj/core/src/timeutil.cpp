#include "loadcast/timeutil.hpp"

#include <charconv>
#include <cstdio>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t width, int& out) {
    if (pos + width > text.size()) {
        return false;
    }
    const char* first = text.data() + pos;
    const char* last = first + width;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') {
            return false;
        }
    }
    return std::from_chars(first, last, out).ec == std::errc{};
}

[[noreturn]] void bad(std::string_view text) {
    throw InvalidInput("malformed timestamp '" + std::string(text) + "'");
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' || !read_int(text, 5, 2, mo) ||
        text[7] != '-' || !read_int(text, 8, 2, d)) {
        bad(text);
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        bad(text);
    }
    if (text.size() == 10) {
        return Timestamp{sys_days{ymd}};
    }
    if ((text[10] != 'T' && text[10] != ' ') || !read_int(text, 11, 2, h) || text.size() < 16 ||
        text[13] != ':' || !read_int(text, 14, 2, mi)) {
        bad(text);
    }
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_int(text, pos + 1, 2, s)) {
            bad(text);
        }
        pos += 3;
    }
    if (h > 23 || mi > 59 || s > 59) {
        bad(text);
    }
    seconds offset{0};
    if (pos >= text.size()) {
        bad(text); // zone is mandatory
    }
    if (text[pos] == 'Z' && pos + 1 == text.size()) {
        // UTC
    } else if ((text[pos] == '+' || text[pos] == '-') && text.size() == pos + 6 && text[pos + 3] == ':') {
        int oh = 0, om = 0;
        if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om) || oh > 18 || om > 59) {
            bad(text);
        }
        offset = hours{oh} + minutes{om};
        if (text[pos] == '-') {
            offset = -offset;
        }
    } else {
        bad(text);
    }
    return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} - offset;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

} // namespace loadcast
