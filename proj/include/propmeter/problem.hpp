#pragma once

// Immutable sparse linear constraint system
//
//    lhs_i <= sum_j a_ij x_j <= rhs_i,   lower_j <= x_j <= upper_j,   x_j integer for j in I.
//
// The objective is never stored: propagation only reads constraints and bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "propmeter/ext_real.hpp"

namespace propmeter
{

struct VariableDomain
{
   ExtReal lower = ExtReal{};
   ExtReal upper = ExtReal::pos_inf();
   bool is_integer = false;
};

struct Term
{
   std::size_t var = 0;
   double coef = 0.0;
};

struct LinearConstraint
{
   std::vector<Term> terms;
   ExtReal lhs = ExtReal::neg_inf();
   ExtReal rhs = ExtReal::pos_inf();
};

/// Validation failure in build_instance. Carries the offending row and/or column.
class ValidationError : public std::invalid_argument
{
 public:
   ValidationError( const std::string& what, std::optional<std::size_t> row,
                    std::optional<std::size_t> col )
       : std::invalid_argument( what ), row_( row ), col_( col )
   {
   }

   std::optional<std::size_t>
   row() const
   {
      return row_;
   }

   std::optional<std::size_t>
   col() const
   {
      return col_;
   }

 private:
   std::optional<std::size_t> row_;
   std::optional<std::size_t> col_;
};

class ProblemInstance;

inline ProblemInstance
build_instance( std::vector<VariableDomain> domains, std::vector<LinearConstraint> constraints,
                std::vector<std::string> names = {} );

class ProblemInstance
{
 public:
   std::size_t
   num_vars() const
   {
      return domains_.size();
   }

   std::size_t
   num_rows() const
   {
      return constraints_.size();
   }

   std::size_t
   num_nonzeros() const
   {
      std::size_t nnz = 0;
      for( const auto& c : constraints_ )
         nnz += c.terms.size();
      return nnz;
   }

   std::span<const VariableDomain>
   domains() const
   {
      return domains_;
   }

   const VariableDomain&
   domain( std::size_t j ) const
   {
      return domains_[j];
   }

   std::span<const LinearConstraint>
   constraints() const
   {
      return constraints_;
   }

   const LinearConstraint&
   constraint( std::size_t i ) const
   {
      return constraints_[i];
   }

   /// Rows containing variable j, ascending.
   std::span<const std::size_t>
   column( std::size_t j ) const
   {
      return column_index_[j];
   }

   /// Variable name; defaults to "x<j>" when the instance has no names.
   std::string
   var_name( std::size_t j ) const
   {
      if( j < names_.size() && !names_[j].empty() )
         return names_[j];
      return "x" + std::to_string( j );
   }

   bool
   has_names() const
   {
      return !names_.empty();
   }

   bool
   operator==( const ProblemInstance& other ) const;

 private:
   friend ProblemInstance build_instance( std::vector<VariableDomain>,
                                          std::vector<LinearConstraint>,
                                          std::vector<std::string> );

   ProblemInstance() = default;

   std::vector<VariableDomain> domains_;
   std::vector<LinearConstraint> constraints_;
   std::vector<std::vector<std::size_t>> column_index_;
   std::vector<std::string> names_;
};

namespace detail
{

inline bool
bitwise_equal( double a, double b )
{
   return a == b && std::signbit( a ) == std::signbit( b );
}

} // namespace detail

inline bool
ProblemInstance::operator==( const ProblemInstance& other ) const
{
   if( domains_.size() != other.domains_.size() ||
       constraints_.size() != other.constraints_.size() )
      return false;
   for( std::size_t j = 0; j < domains_.size(); ++j )
   {
      const auto& a = domains_[j];
      const auto& b = other.domains_[j];
      if( !a.lower.identical( b.lower ) || !a.upper.identical( b.upper ) ||
          a.is_integer != b.is_integer )
         return false;
   }
   for( std::size_t i = 0; i < constraints_.size(); ++i )
   {
      const auto& a = constraints_[i];
      const auto& b = other.constraints_[i];
      if( !a.lhs.identical( b.lhs ) || !a.rhs.identical( b.rhs ) ||
          a.terms.size() != b.terms.size() )
         return false;
      for( std::size_t k = 0; k < a.terms.size(); ++k )
         if( a.terms[k].var != b.terms[k].var ||
             !detail::bitwise_equal( a.terms[k].coef, b.terms[k].coef ) )
            return false;
   }
   return true;
}

/// Validates and canonicalizes a constraint system.
///
/// Terms are sorted by variable index and the column index is built. Finite
/// bounds of integer variables are rounded inward. Throws ValidationError on
/// zero, NaN or infinite coefficients, duplicate variables in a row, unknown
/// variables, lhs > rhs, rows free on both sides, and empty domains.
inline ProblemInstance
build_instance( std::vector<VariableDomain> domains, std::vector<LinearConstraint> constraints,
                std::vector<std::string> names )
{
   const std::size_t n = domains.size();
   if( !names.empty() && names.size() != n )
      throw ValidationError( "name count does not match variable count", std::nullopt,
                             std::nullopt );

   for( std::size_t j = 0; j < n; ++j )
   {
      auto& d = domains[j];
      if( d.lower.is_pos_inf() )
         throw ValidationError( "lower bound is +inf", std::nullopt, j );
      if( d.upper.is_neg_inf() )
         throw ValidationError( "upper bound is -inf", std::nullopt, j );
      if( d.is_integer )
      {
         if( d.lower.is_finite() )
            d.lower = ExtReal::from( std::ceil( d.lower.value() ) );
         if( d.upper.is_finite() )
            d.upper = ExtReal::from( std::floor( d.upper.value() ) );
      }
      if( d.lower > d.upper )
         throw ValidationError( "empty domain (lower > upper)", std::nullopt, j );
   }

   for( std::size_t i = 0; i < constraints.size(); ++i )
   {
      auto& c = constraints[i];
      if( c.lhs.is_pos_inf() || c.rhs.is_neg_inf() )
         throw ValidationError( "side has the wrong infinity", i, std::nullopt );
      if( c.lhs.is_infinite() && c.rhs.is_infinite() )
         throw ValidationError( "row is free on both sides", i, std::nullopt );
      if( c.lhs > c.rhs )
         throw ValidationError( "lhs > rhs", i, std::nullopt );
      std::sort( c.terms.begin(), c.terms.end(),
                 []( const Term& a, const Term& b ) { return a.var < b.var; } );
      for( std::size_t k = 0; k < c.terms.size(); ++k )
      {
         const Term& t = c.terms[k];
         if( t.var >= n )
            throw ValidationError( "unknown variable", i, t.var );
         if( std::isnan( t.coef ) )
            throw ValidationError( "NaN coefficient", i, t.var );
         if( t.coef == 0.0 )
            throw ValidationError( "zero coefficient", i, t.var );
         if( std::abs( t.coef ) >= kInfThreshold )
            throw ValidationError( "infinite coefficient", i, t.var );
         if( k > 0 && c.terms[k - 1].var == t.var )
            throw ValidationError( "duplicate variable in row", i, t.var );
      }
   }

   ProblemInstance inst;
   inst.column_index_.assign( n, {} );
   for( std::size_t i = 0; i < constraints.size(); ++i )
      for( const Term& t : constraints[i].terms )
         inst.column_index_[t.var].push_back( i );
   inst.domains_ = std::move( domains );
   inst.constraints_ = std::move( constraints );
   inst.names_ = std::move( names );
   return inst;
}

} // namespace propmeter
