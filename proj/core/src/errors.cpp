#include "loadcast/errors.hpp"

namespace loadcast {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::not_found:
        return "not_found";
    case ErrorCode::invalid_input:
        return "invalid_input";
    case ErrorCode::insufficient_data:
        return "insufficient_data";
    case ErrorCode::internal:
        return "internal";
    }
    return "internal";
}

} // namespace loadcast
