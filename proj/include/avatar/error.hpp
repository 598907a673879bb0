// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace avatar {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (bad syntax, truncated section, non-numeric field).
class ParseError : public Error
{
public:
    using Error::Error;
};

/// Structurally valid input whose declared and actual dimensions disagree.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Parameter or buffer sizes that do not match what an operation expects.
class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Raster file with an unsupported bit depth, channel count or encoding.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// Bad configuration, including failures of external provider processes.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Argument outside an operation's documented domain.
class ArgumentError : public Error
{
public:
    using Error::Error;
};

/// Non-finite losses or other failures of the numerical machinery.
class NumericalError : public Error
{
public:
    using Error::Error;
};

} // namespace avatar
