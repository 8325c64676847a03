#pragma once

// Minimal CSV writer. Undefined values are written as empty fields.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "propmeter/format.hpp"

namespace propmeter
{

class CsvWriter
{
 public:
   explicit CsvWriter( std::ostream& out ) : out_( out ) {}

   CsvWriter&
   field( std::string_view s )
   {
      sep();
      if( s.find_first_of( ",\"\n" ) == std::string_view::npos )
         out_ << s;
      else
      {
         out_ << '"';
         for( char c : s )
         {
            if( c == '"' )
               out_ << '"';
            out_ << c;
         }
         out_ << '"';
      }
      return *this;
   }

   CsvWriter&
   field( const char* s )
   {
      return field( std::string_view( s ) );
   }

   CsvWriter&
   field( const std::string& s )
   {
      return field( std::string_view( s ) );
   }

   CsvWriter&
   field( double v )
   {
      sep();
      if( std::isinf( v ) )
         out_ << ( v > 0 ? "inf" : "-inf" );
      else
         out_ << format_double( v );
      return *this;
   }

   CsvWriter&
   field( std::int64_t v )
   {
      sep();
      out_ << v;
      return *this;
   }

   CsvWriter&
   field( std::size_t v )
   {
      sep();
      out_ << v;
      return *this;
   }

   CsvWriter&
   field( bool v )
   {
      sep();
      out_ << ( v ? 1 : 0 );
      return *this;
   }

   template <typename T>
   CsvWriter&
   field( const std::optional<T>& v )
   {
      if( v )
         return field( *v );
      sep();
      return *this;
   }

   CsvWriter&
   empty()
   {
      sep();
      return *this;
   }

   void
   end_row()
   {
      out_ << '\n';
      first_ = true;
   }

 private:
   void
   sep()
   {
      if( !first_ )
         out_ << ',';
      first_ = false;
   }

   std::ostream& out_;
   bool first_ = true;
};

} // namespace propmeter
