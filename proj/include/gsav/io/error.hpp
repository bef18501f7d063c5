// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gsav::io {

/// Failure while reading or writing an asset. The code separates the
/// structural failure modes so callers and tests can tell them apart.
class AssetError : public std::runtime_error {
public:
    enum class Code { Io, BadMagic, BadVersion, Truncated, DimMismatch, Format };

    AssetError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

}  // namespace gsav::io
