#pragma once

// Activity arithmetic for a single linear constraint.
//
// The minimum activity takes the lower bound of every positive-coefficient
// variable and the upper bound of every negative one; the maximum activity
// does the opposite. Infinite contributions are counted instead of summed so
// that removing one term (the residual) stays exact.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "propmeter/bounds.hpp"
#include "propmeter/problem.hpp"

namespace propmeter
{

enum class ActivityKind
{
   kMin,
   kMax
};

struct ActivityValue
{
   double finite_part = 0.0;
   int pos_inf_count = 0;
   int neg_inf_count = 0;

   bool
   is_mixed() const
   {
      return pos_inf_count > 0 && neg_inf_count > 0;
   }

   /// Extended-real value, or nullopt when both infinities contribute.
   std::optional<ExtReal>
   value() const
   {
      if( is_mixed() )
         return std::nullopt;
      if( pos_inf_count > 0 )
         return ExtReal::pos_inf();
      if( neg_inf_count > 0 )
         return ExtReal::neg_inf();
      return ExtReal::from( finite_part );
   }

   void
   add( const ExtReal& contribution )
   {
      if( contribution.is_pos_inf() )
         ++pos_inf_count;
      else if( contribution.is_neg_inf() )
         ++neg_inf_count;
      else
         finite_part += contribution.value();
   }
};

namespace detail
{

/// coef * bound, where bound is the one selected for the activity kind.
inline ExtReal
term_contribution( const Term& t, const BoundsState& b, ActivityKind kind )
{
   const bool use_lower = ( t.coef > 0 ) == ( kind == ActivityKind::kMin );
   const ExtReal& bnd = use_lower ? b.lower[t.var] : b.upper[t.var];
   if( bnd.is_finite() )
      return ExtReal::from( t.coef * bnd.value() );
   const bool positive = bnd.is_pos_inf() == ( t.coef > 0 );
   return positive ? ExtReal::pos_inf() : ExtReal::neg_inf();
}

/// Activity summed in stored term order, optionally skipping one variable.
inline ActivityValue
activity_excluding( const LinearConstraint& c, const BoundsState& b, ActivityKind kind,
                    std::optional<std::size_t> skip )
{
   ActivityValue act;
   for( const Term& t : c.terms )
   {
      if( skip && t.var == *skip )
         continue;
      const bool use_lower = ( t.coef > 0 ) == ( kind == ActivityKind::kMin );
      const ExtReal& bnd = use_lower ? b.lower[t.var] : b.upper[t.var];
      // finite products are summed raw; a product beyond the threshold is
      // still finite information
      if( bnd.is_finite() )
         act.finite_part += t.coef * bnd.value();
      else
         act.add( term_contribution( t, b, kind ) );
   }
   return act;
}

inline const Term*
find_term( const LinearConstraint& c, std::size_t j )
{
   for( const Term& t : c.terms )
      if( t.var == j )
         return &t;
   return nullptr;
}

} // namespace detail

inline ActivityValue
min_activity( const LinearConstraint& c, const BoundsState& b )
{
   return detail::activity_excluding( c, b, ActivityKind::kMin, std::nullopt );
}

inline ActivityValue
max_activity( const LinearConstraint& c, const BoundsState& b )
{
   return detail::activity_excluding( c, b, ActivityKind::kMax, std::nullopt );
}

/// Activity with variable j's term removed. Throws std::out_of_range if j is
/// not in the constraint.
inline ActivityValue
residual_activity( const LinearConstraint& c, const BoundsState& b, std::size_t j,
                   ActivityKind kind )
{
   if( detail::find_term( c, j ) == nullptr )
      throw std::out_of_range( "activity_residual: variable not in constraint" );
   return detail::activity_excluding( c, b, kind, j );
}

/// Residual as an extended real; nullopt when it mixes both infinities.
inline std::optional<ExtReal>
activity_residual( const LinearConstraint& c, const BoundsState& b, std::size_t j,
                   ActivityKind kind )
{
   return residual_activity( c, b, j, kind ).value();
}

struct BoundCandidates
{
   ExtReal lower = ExtReal::neg_inf();
   ExtReal upper = ExtReal::pos_inf();
};

/// Bounds on x_j implied by one constraint and the other variables' bounds.
///
/// For a_j > 0:  lower = (lhs - maxres_j) / a_j,  upper = (rhs - minres_j) / a_j.
/// For a_j < 0 the two swap. Any infinite side or residual yields the vacuous
/// infinity. Integer variables are rounded to ceil(lower - eps) and
/// floor(upper + eps).
///
/// The result is canonicalized, so a candidate may be the "wrong" infinity
/// (upper = -inf, lower = +inf) when a finite result overflows the threshold;
/// callers treat that as infeasibility.
inline BoundCandidates
bound_candidates( const LinearConstraint& c, const BoundsState& b, std::size_t j, bool is_integer,
                  double integrality_eps )
{
   const Term* term = detail::find_term( c, j );
   if( term == nullptr )
      throw std::out_of_range( "bound_candidates: variable not in constraint" );
   const double a = term->coef;

   const auto minres = detail::activity_excluding( c, b, ActivityKind::kMin, j );
   const auto maxres = detail::activity_excluding( c, b, ActivityKind::kMax, j );

   // (side - residual) / a, or nullopt when vacuous. Only the quotient is
   // canonicalized.
   auto quotient = []( const ExtReal& side, const ActivityValue& res, double a ) -> std::optional<ExtReal> {
      if( side.is_infinite() || res.pos_inf_count > 0 || res.neg_inf_count > 0 )
         return std::nullopt;
      return ExtReal::from( ( side.value() - res.finite_part ) / a );
   };

   // rhs - minres bounds a*x_j from above; lhs - maxres bounds it from below.
   const auto from_rhs = quotient( c.rhs, minres, a );
   const auto from_lhs = quotient( c.lhs, maxres, a );

   BoundCandidates cand;
   if( a > 0 )
   {
      if( from_lhs )
         cand.lower = *from_lhs;
      if( from_rhs )
         cand.upper = *from_rhs;
   }
   else
   {
      if( from_rhs )
         cand.lower = *from_rhs;
      if( from_lhs )
         cand.upper = *from_lhs;
   }

   if( is_integer )
   {
      if( cand.lower.is_finite() )
         cand.lower = ExtReal::from( std::ceil( cand.lower.value() - integrality_eps ) );
      if( cand.upper.is_finite() )
         cand.upper = ExtReal::from( std::floor( cand.upper.value() + integrality_eps ) );
   }
   return cand;
}

enum class ConstraintStatus
{
   kActive,
   kRedundant,
   kInfeasible
};

/// Row-level check from the activity bounds alone. Infeasibility needs a
/// violation larger than `feas_tol`.
inline ConstraintStatus
constraint_status( const LinearConstraint& c, const BoundsState& b, double feas_tol = 0.0 )
{
   const auto amin = min_activity( c, b ).value();
   const auto amax = max_activity( c, b ).value();
   if( !amin || !amax )
      return ConstraintStatus::kActive;
   auto exceeds = [feas_tol]( const ExtReal& x, const ExtReal& y ) {
      if( x.is_finite() && y.is_finite() )
         return x.value() > y.value() + feas_tol;
      return x > y;
   };
   if( exceeds( *amin, c.rhs ) || exceeds( c.lhs, *amax ) )
      return ConstraintStatus::kInfeasible;
   if( c.lhs <= *amin && *amax <= c.rhs )
      return ConstraintStatus::kRedundant;
   return ConstraintStatus::kActive;
}

} // namespace propmeter
