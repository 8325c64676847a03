#pragma once

// Canonical plain-text serialization of ProblemInstance.
//
// Grammar (tokens separated by blanks, '#' starts a comment line):
//
//    propmeter-instance 1
//    vars <n>
//    <j> <lower> <upper> <C|I> [<name>]        n lines, j = 0..n-1 in order
//    rows <m>
//    <i> <lhs> <rhs> <k> (<var> <coef>){k}     m lines, i = 0..m-1 in order
//    end
//
// Numbers are written in shortest round-trip form, so serialize/parse is
// bit-exact. Infinities are written as "-inf" / "+inf"; "inf" is accepted on
// input as +inf. Names must not contain blanks.

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "propmeter/problem.hpp"

namespace propmeter
{

class TextFormatError : public std::runtime_error
{
 public:
   TextFormatError( std::size_t line, const std::string& what )
       : std::runtime_error( "line " + std::to_string( line ) + ": " + what ), line_( line )
   {
   }

   std::size_t
   line() const
   {
      return line_;
   }

 private:
   std::size_t line_;
};

inline std::string
serialize_instance( const ProblemInstance& inst )
{
   std::ostringstream out;
   out << "propmeter-instance 1\n";
   out << "vars " << inst.num_vars() << '\n';
   for( std::size_t j = 0; j < inst.num_vars(); ++j )
   {
      const auto& d = inst.domain( j );
      out << j << ' ' << to_string( d.lower ) << ' ' << to_string( d.upper ) << ' '
          << ( d.is_integer ? 'I' : 'C' );
      if( inst.has_names() )
         out << ' ' << inst.var_name( j );
      out << '\n';
   }
   out << "rows " << inst.num_rows() << '\n';
   for( std::size_t i = 0; i < inst.num_rows(); ++i )
   {
      const auto& c = inst.constraint( i );
      out << i << ' ' << to_string( c.lhs ) << ' ' << to_string( c.rhs ) << ' '
          << c.terms.size();
      for( const Term& t : c.terms )
         out << ' ' << t.var << ' ' << format_double( t.coef );
      out << '\n';
   }
   out << "end\n";
   return out.str();
}

namespace detail
{

struct LineReader
{
   std::istringstream in;
   std::size_t lineno = 0;

   explicit LineReader( std::string_view text ) : in( std::string( text ) ) {}

   /// Next non-empty, non-comment line split into tokens.
   std::vector<std::string>
   next( const char* expecting )
   {
      std::string line;
      while( std::getline( in, line ) )
      {
         ++lineno;
         std::istringstream ls( line );
         std::vector<std::string> tokens;
         std::string tok;
         while( ls >> tok )
            tokens.push_back( tok );
         if( tokens.empty() || tokens.front().front() == '#' )
            continue;
         return tokens;
      }
      throw TextFormatError( lineno, std::string( "unexpected end of input, expecting " ) +
                                         expecting );
   }
};

inline ExtReal
parse_ext_token( const std::string& tok, std::size_t line )
{
   if( tok == "+inf" || tok == "inf" )
      return ExtReal::pos_inf();
   if( tok == "-inf" )
      return ExtReal::neg_inf();
   auto v = parse_double( tok );
   if( !v )
      throw TextFormatError( line, "malformed number '" + tok + "'" );
   try
   {
      return ExtReal::from( *v );
   }
   catch( const std::invalid_argument& )
   {
      throw TextFormatError( line, "NaN is not allowed" );
   }
}

inline std::size_t
parse_index_token( const std::string& tok, std::size_t line )
{
   std::size_t value = 0;
   auto res = std::from_chars( tok.data(), tok.data() + tok.size(), value );
   if( res.ec != std::errc() || res.ptr != tok.data() + tok.size() )
      throw TextFormatError( line, "malformed index '" + tok + "'" );
   return value;
}

} // namespace detail

/// Parses the canonical text format. Throws TextFormatError on syntax errors
/// and ValidationError on semantic ones.
inline ProblemInstance
parse_instance_text( std::string_view text )
{
   detail::LineReader reader( text );
   auto header = reader.next( "header" );
   if( header.size() != 2 || header[0] != "propmeter-instance" || header[1] != "1" )
      throw TextFormatError( reader.lineno, "missing 'propmeter-instance 1' header" );

   auto vars = reader.next( "'vars'" );
   if( vars.size() != 2 || vars[0] != "vars" )
      throw TextFormatError( reader.lineno, "expected 'vars <n>'" );
   const std::size_t n = detail::parse_index_token( vars[1], reader.lineno );

   std::vector<VariableDomain> domains( n );
   std::vector<std::string> names;
   for( std::size_t j = 0; j < n; ++j )
   {
      auto tok = reader.next( "variable line" );
      if( tok.size() != 4 && tok.size() != 5 )
         throw TextFormatError( reader.lineno, "variable line needs 4 or 5 fields" );
      if( detail::parse_index_token( tok[0], reader.lineno ) != j )
         throw TextFormatError( reader.lineno, "variable lines must be in index order" );
      domains[j].lower = detail::parse_ext_token( tok[1], reader.lineno );
      domains[j].upper = detail::parse_ext_token( tok[2], reader.lineno );
      if( tok[3] != "C" && tok[3] != "I" )
         throw TextFormatError( reader.lineno, "type must be C or I" );
      domains[j].is_integer = tok[3] == "I";
      if( tok.size() == 5 )
      {
         if( names.empty() )
            names.resize( n );
         names[j] = tok[4];
      }
   }

   auto rows = reader.next( "'rows'" );
   if( rows.size() != 2 || rows[0] != "rows" )
      throw TextFormatError( reader.lineno, "expected 'rows <m>'" );
   const std::size_t m = detail::parse_index_token( rows[1], reader.lineno );

   std::vector<LinearConstraint> constraints( m );
   for( std::size_t i = 0; i < m; ++i )
   {
      auto tok = reader.next( "row line" );
      if( tok.size() < 4 )
         throw TextFormatError( reader.lineno, "row line needs at least 4 fields" );
      if( detail::parse_index_token( tok[0], reader.lineno ) != i )
         throw TextFormatError( reader.lineno, "row lines must be in index order" );
      auto& c = constraints[i];
      c.lhs = detail::parse_ext_token( tok[1], reader.lineno );
      c.rhs = detail::parse_ext_token( tok[2], reader.lineno );
      const std::size_t k = detail::parse_index_token( tok[3], reader.lineno );
      if( tok.size() != 4 + 2 * k )
         throw TextFormatError( reader.lineno, "row term count does not match" );
      for( std::size_t t = 0; t < k; ++t )
      {
         Term term;
         term.var = detail::parse_index_token( tok[4 + 2 * t], reader.lineno );
         auto coef = parse_double( tok[5 + 2 * t] );
         if( !coef )
            throw TextFormatError( reader.lineno, "malformed coefficient" );
         term.coef = *coef;
         c.terms.push_back( term );
      }
   }

   auto end = reader.next( "'end'" );
   if( end.size() != 1 || end[0] != "end" )
      throw TextFormatError( reader.lineno, "expected 'end'" );

   return build_instance( std::move( domains ), std::move( constraints ), std::move( names ) );
}

} // namespace propmeter
