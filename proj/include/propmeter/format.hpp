#pragma once

// Shortest round-trip decimal formatting and strict parsing of doubles.

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace propmeter
{

/// Shortest decimal string that parses back to exactly `x`.
inline std::string
format_double( double x )
{
   char buf[64];
   auto res = std::to_chars( buf, buf + sizeof( buf ), x );
   if( res.ec != std::errc() )
      throw std::runtime_error( "format_double: conversion failed" );
   return std::string( buf, res.ptr );
}

/// Parses a whole token as a double. Accepts a leading '+'. Returns nullopt on
/// any trailing garbage.
inline std::optional<double>
parse_double( std::string_view token )
{
   if( !token.empty() && token.front() == '+' )
      token.remove_prefix( 1 );
   if( token.empty() )
      return std::nullopt;
   double value = 0.0;
   auto res = std::from_chars( token.data(), token.data() + token.size(), value );
   if( res.ec != std::errc() || res.ptr != token.data() + token.size() )
      return std::nullopt;
   return value;
}

} // namespace propmeter
