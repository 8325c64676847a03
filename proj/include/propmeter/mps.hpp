#pragma once

// Free-format MPS reader.
//
// Supported sections: NAME, ROWS (N/L/G/E), COLUMNS with INTORG/INTEND
// markers, RHS, RANGES, BOUNDS (LO UP FX FR MI PL BV LI UI), ENDATA.
// OBJSENSE, OBJNAME, SOS, INDICATORS and the quadratic sections are skipped
// with a warning. Fields are whitespace-delimited; fixed column positions are
// not enforced, so names must not contain blanks.
//
// Row sides:       L -> [-inf, b]    G -> [b, +inf]    E -> [b, b]
// RANGES value R:  L -> [b - |R|, b] G -> [b, b + |R|]
//                  E -> [b, b + R] if R > 0, [b + R, b] if R < 0
//
// Columns default to [0, +inf), integer columns included. An UP bound below
// zero on a column whose lower bound is still the default 0 sets the lower
// bound to -inf (with a warning), as most MPS readers do.

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "propmeter/problem.hpp"

namespace propmeter
{

struct ParseDiagnostics
{
   struct Warning
   {
      std::size_t line = 0;
      std::string message;
   };

   std::vector<Warning> warnings;
   /// Counts include the objective row and its entries.
   std::size_t rows_read = 0;
   std::size_t columns_read = 0;
   std::size_t entries_read = 0;
};

class MpsError : public std::runtime_error
{
 public:
   enum class Kind
   {
      kMalformedSection,
      kMalformedLine,
      kDuplicateRow,
      kDuplicateEntry,
      kUnknownRow,
      kUnknownColumn,
      kBadNumber
   };

   MpsError( Kind kind, std::size_t line, const std::string& what )
       : std::runtime_error( "MPS line " + std::to_string( line ) + ": " + what ), kind_( kind ),
         line_( line )
   {
   }

   Kind
   kind() const
   {
      return kind_;
   }

   std::size_t
   line() const
   {
      return line_;
   }

 private:
   Kind kind_;
   std::size_t line_;
};

struct MpsResult
{
   ProblemInstance instance;
   ParseDiagnostics diagnostics;
   std::string name;
};

namespace detail
{

enum class MpsSection
{
   kNone,
   kName,
   kRows,
   kColumns,
   kRhs,
   kRanges,
   kBounds,
   kSkipped,
   kEnd
};

struct MpsRow
{
   char sense = 'N';
   std::string name;
   double rhs = 0.0;
   std::optional<double> range;
   std::size_t index = 0; // constraint index, valid for non-N rows
};

struct MpsColumn
{
   std::string name;
   ExtReal lower = ExtReal{};
   ExtReal upper = ExtReal::pos_inf();
   bool is_integer = false;
   bool upper_set = false;
   bool lower_set = false;
};

class MpsReader
{
 public:
   explicit MpsReader( std::string_view text ) : text_( text ) {}

   MpsResult
   run()
   {
      std::istringstream in{ std::string( text_ ) };
      std::string line;
      bool saw_end = false;
      while( std::getline( in, line ) )
      {
         ++lineno_;
         if( !line.empty() && line.back() == '\r' )
            line.pop_back();
         if( line.empty() || line.front() == '*' )
            continue;
         auto tokens = split( line );
         if( tokens.empty() )
            continue;
         if( line.front() != ' ' && line.front() != '\t' )
         {
            header( tokens );
            if( section_ == MpsSection::kEnd )
            {
               saw_end = true;
               break;
            }
            continue;
         }
         switch( section_ )
         {
         case MpsSection::kRows:
            row_line( tokens );
            break;
         case MpsSection::kColumns:
            column_line( tokens );
            break;
         case MpsSection::kRhs:
            rhs_line( tokens, false );
            break;
         case MpsSection::kRanges:
            rhs_line( tokens, true );
            break;
         case MpsSection::kBounds:
            bound_line( tokens );
            break;
         case MpsSection::kSkipped:
            break;
         default:
            throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                            "data line outside of any section" );
         }
      }
      if( !saw_end )
         warn( "missing ENDATA" );
      return finish();
   }

 private:
   static std::vector<std::string>
   split( const std::string& line )
   {
      std::istringstream ls( line );
      std::vector<std::string> tokens;
      std::string tok;
      while( ls >> tok )
         tokens.push_back( tok );
      return tokens;
   }

   void
   warn( std::string message )
   {
      diag_.warnings.push_back( { lineno_, std::move( message ) } );
   }

   double
   number( const std::string& tok )
   {
      auto v = parse_double( tok );
      if( !v || std::isnan( *v ) )
         throw MpsError( MpsError::Kind::kBadNumber, lineno_, "malformed number '" + tok + "'" );
      return *v;
   }

   void
   header( const std::vector<std::string>& tokens )
   {
      const std::string& word = tokens[0];
      if( word == "NAME" )
      {
         section_ = MpsSection::kName;
         if( tokens.size() > 1 )
            name_ = tokens[1];
      }
      else if( word == "ROWS" )
         section_ = MpsSection::kRows;
      else if( word == "COLUMNS" )
         section_ = MpsSection::kColumns;
      else if( word == "RHS" )
         section_ = MpsSection::kRhs;
      else if( word == "RANGES" )
         section_ = MpsSection::kRanges;
      else if( word == "BOUNDS" )
         section_ = MpsSection::kBounds;
      else if( word == "ENDATA" )
         section_ = MpsSection::kEnd;
      else if( word == "OBJSENSE" || word == "OBJSENS" || word == "OBJNAME" || word == "SOS" ||
               word == "INDICATORS" || word == "QUADOBJ" || word == "QMATRIX" ||
               word == "QSECTION" || word == "QCMATRIX" || word == "CSECTION" )
      {
         section_ = MpsSection::kSkipped;
         warn( "section " + word + " skipped" );
      }
      else
         throw MpsError( MpsError::Kind::kMalformedSection, lineno_,
                         "unknown section header '" + word + "'" );
   }

   void
   row_line( const std::vector<std::string>& tokens )
   {
      if( tokens.size() != 2 || tokens[0].size() != 1 )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_, "expected '<sense> <name>'" );
      const char sense = tokens[0][0];
      if( sense != 'N' && sense != 'L' && sense != 'G' && sense != 'E' )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                         std::string( "unknown row sense '" ) + sense + "'" );
      const std::string& name = tokens[1];
      if( row_by_name_.count( name ) )
         throw MpsError( MpsError::Kind::kDuplicateRow, lineno_, "duplicate row '" + name + "'" );
      MpsRow row;
      row.sense = sense;
      row.name = name;
      if( sense == 'N' )
      {
         if( saw_objective_ )
            warn( "additional free row '" + name + "' discarded" );
         saw_objective_ = true;
      }
      else
         row.index = num_constraints_++;
      row_by_name_.emplace( name, rows_.size() );
      rows_.push_back( std::move( row ) );
      ++diag_.rows_read;
   }

   std::size_t
   column_for( const std::string& name )
   {
      auto it = col_by_name_.find( name );
      if( it != col_by_name_.end() )
         return it->second;
      const std::size_t j = cols_.size();
      MpsColumn col;
      col.name = name;
      col.is_integer = in_integer_block_;
      cols_.push_back( std::move( col ) );
      col_by_name_.emplace( name, j );
      entries_.emplace_back();
      ++diag_.columns_read;
      return j;
   }

   const MpsRow&
   row_named( const std::string& name )
   {
      auto it = row_by_name_.find( name );
      if( it == row_by_name_.end() )
         throw MpsError( MpsError::Kind::kUnknownRow, lineno_, "unknown row '" + name + "'" );
      return rows_[it->second];
   }

   void
   column_line( const std::vector<std::string>& tokens )
   {
      if( tokens.size() == 3 && tokens[1] == "'MARKER'" )
      {
         if( tokens[2] == "'INTORG'" )
            in_integer_block_ = true;
         else if( tokens[2] == "'INTEND'" )
            in_integer_block_ = false;
         else
            throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                            "unknown marker " + tokens[2] );
         return;
      }
      if( tokens.size() != 3 && tokens.size() != 5 )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                         "expected '<column> <row> <value> [<row> <value>]'" );
      const std::size_t j = column_for( tokens[0] );
      if( in_integer_block_ )
         cols_[j].is_integer = true;
      for( std::size_t k = 1; k + 1 < tokens.size(); k += 2 )
      {
         const MpsRow& row = row_named( tokens[k] );
         const double value = number( tokens[k + 1] );
         ++diag_.entries_read;
         if( row.sense == 'N' )
            continue;
         if( value == 0.0 )
         {
            warn( "zero coefficient for column '" + tokens[0] + "' in row '" + row.name +
                  "' ignored" );
            continue;
         }
         for( const auto& [r, v] : entries_[j] )
            if( r == row.index )
               throw MpsError( MpsError::Kind::kDuplicateEntry, lineno_,
                               "duplicate entry for column '" + tokens[0] + "' in row '" +
                                   row.name + "'" );
         entries_[j].emplace_back( row.index, value );
      }
   }

   void
   rhs_line( const std::vector<std::string>& tokens, bool ranges )
   {
      // Optional set name: odd token count means it is present.
      const std::size_t first = tokens.size() % 2 == 1 ? 1 : 0;
      if( tokens.size() < 2 || tokens.size() > 5 )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                         ranges ? "malformed RANGES line" : "malformed RHS line" );
      for( std::size_t k = first; k + 1 < tokens.size(); k += 2 )
      {
         auto it = row_by_name_.find( tokens[k] );
         if( it == row_by_name_.end() )
            throw MpsError( MpsError::Kind::kUnknownRow, lineno_,
                            "unknown row '" + tokens[k] + "'" );
         MpsRow& row = rows_[it->second];
         const double value = number( tokens[k + 1] );
         if( row.sense == 'N' )
         {
            if( ranges )
               warn( "range on free row '" + row.name + "' ignored" );
            continue;
         }
         if( ranges )
            row.range = value;
         else
            row.rhs = value;
      }
   }

   std::size_t
   known_column( const std::string& name )
   {
      auto it = col_by_name_.find( name );
      if( it == col_by_name_.end() )
         throw MpsError( MpsError::Kind::kUnknownColumn, lineno_,
                         "unknown column '" + name + "'" );
      return it->second;
   }

   void
   bound_line( const std::vector<std::string>& tokens )
   {
      if( tokens.size() < 2 || tokens.size() > 4 )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_, "malformed BOUNDS line" );
      const std::string& type = tokens[0];
      const bool needs_value = type == "LO" || type == "UP" || type == "FX" || type == "LI" ||
                               type == "UI";
      const bool no_value = type == "FR" || type == "MI" || type == "PL";
      const bool binary = type == "BV";
      if( type == "SC" || type == "SI" )
      {
         warn( "bound type " + type + " skipped" );
         return;
      }
      if( !needs_value && !no_value && !binary )
         throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                         "unknown bound type '" + type + "'" );

      std::string colname;
      std::optional<std::string> valtok;
      if( needs_value )
      {
         if( tokens.size() == 4 )
         {
            colname = tokens[2];
            valtok = tokens[3];
         }
         else if( tokens.size() == 3 )
         {
            colname = tokens[1];
            valtok = tokens[2];
         }
         else
            throw MpsError( MpsError::Kind::kMalformedLine, lineno_,
                            "bound type " + type + " needs a value" );
      }
      else if( tokens.size() == 2 )
         colname = tokens[1];
      else if( tokens.size() == 4 )
         colname = tokens[2];
      else if( col_by_name_.count( tokens[2] ) )
         colname = tokens[2];
      else
      {
         colname = tokens[1];
         valtok = tokens[2];
      }

      const std::size_t j = known_column( colname );
      MpsColumn& col = cols_[j];
      const double value = valtok ? number( *valtok ) : 0.0;

      if( type == "LO" || type == "LI" )
      {
         col.lower = ExtReal::from( value );
         col.lower_set = true;
      }
      else if( type == "UP" || type == "UI" )
      {
         col.upper = ExtReal::from( value );
         col.upper_set = true;
         if( value < 0.0 && !col.lower_set && col.lower == ExtReal{} )
         {
            col.lower = ExtReal::neg_inf();
            warn( "negative upper bound on '" + colname + "' sets lower bound to -inf" );
         }
      }
      else if( type == "FX" )
      {
         col.lower = col.upper = ExtReal::from( value );
         col.lower_set = col.upper_set = true;
      }
      else if( type == "FR" )
      {
         col.lower = ExtReal::neg_inf();
         col.upper = ExtReal::pos_inf();
         col.lower_set = col.upper_set = true;
      }
      else if( type == "MI" )
      {
         col.lower = ExtReal::neg_inf();
         col.lower_set = true;
      }
      else if( type == "PL" )
      {
         col.upper = ExtReal::pos_inf();
         col.upper_set = true;
      }
      else if( type == "BV" )
      {
         if( col.lower_set || col.upper_set )
            warn( "BV overrides earlier bounds of '" + colname + "'" );
         col.lower = ExtReal{};
         col.upper = ExtReal::from( 1.0 );
         col.lower_set = col.upper_set = true;
      }
      if( type == "LI" || type == "UI" || type == "BV" )
         col.is_integer = true;
   }

   MpsResult
   finish()
   {
      std::vector<LinearConstraint> constraints( num_constraints_ );
      for( const MpsRow& row : rows_ )
      {
         if( row.sense == 'N' )
            continue;
         auto& c = constraints[row.index];
         const ExtReal b = ExtReal::from( row.rhs );
         switch( row.sense )
         {
         case 'L':
            c.lhs = ExtReal::neg_inf();
            c.rhs = b;
            break;
         case 'G':
            c.lhs = b;
            c.rhs = ExtReal::pos_inf();
            break;
         default:
            c.lhs = c.rhs = b;
            break;
         }
         if( row.range && *row.range != 0.0 )
         {
            const double r = *row.range;
            if( row.sense == 'L' )
               c.lhs = ExtReal::from( row.rhs - std::abs( r ) );
            else if( row.sense == 'G' )
               c.rhs = ExtReal::from( row.rhs + std::abs( r ) );
            else if( r > 0 )
               c.rhs = ExtReal::from( row.rhs + r );
            else
               c.lhs = ExtReal::from( row.rhs + r );
         }
      }
      for( std::size_t j = 0; j < entries_.size(); ++j )
         for( const auto& [r, v] : entries_[j] )
            constraints[r].terms.push_back( Term{ j, v } );

      std::vector<VariableDomain> domains;
      std::vector<std::string> names;
      domains.reserve( cols_.size() );
      names.reserve( cols_.size() );
      for( const MpsColumn& col : cols_ )
      {
         if( col.is_integer && !col.upper_set )
            diag_.warnings.push_back(
                { lineno_, "integer column '" + col.name + "' has no upper bound; using +inf" } );
         domains.push_back( VariableDomain{ col.lower, col.upper, col.is_integer } );
         names.push_back( col.name );
      }
      return MpsResult{
          build_instance( std::move( domains ), std::move( constraints ), std::move( names ) ),
          std::move( diag_ ), name_ };
   }

   std::string_view text_;
   std::size_t lineno_ = 0;
   MpsSection section_ = MpsSection::kNone;
   std::string name_;
   bool saw_objective_ = false;
   bool in_integer_block_ = false;
   std::size_t num_constraints_ = 0;
   std::vector<MpsRow> rows_;
   std::unordered_map<std::string, std::size_t> row_by_name_;
   std::vector<MpsColumn> cols_;
   std::unordered_map<std::string, std::size_t> col_by_name_;
   std::vector<std::vector<std::pair<std::size_t, double>>> entries_;
   ParseDiagnostics diag_;
};

} // namespace detail

/// Parses MPS text. Throws MpsError (with a 1-based line number) on malformed
/// input and ValidationError if the model itself is invalid.
inline MpsResult
parse_mps( std::string_view text )
{
   return detail::MpsReader( text ).run();
}

} // namespace propmeter
