// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOMSYNC_CORE_ERROR_HPP
#define SOMSYNC_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace somsync {

// Numeric values are part of the C ABI (see include/somsync/somsync.h).
enum class Errc : int {
    ok = 0,
    range_error = 1,
    isi_violation = 2,
    offset_range = 3,
    dimension_mismatch = 4,
    empty_window = 5,
    degenerate_weight = 6,
    window_too_long = 7,
    unsupported_order = 8,
    parse_error = 9,
    io_error = 10,
    invalid_argument = 11,
    internal = 12,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace somsync

#endif
