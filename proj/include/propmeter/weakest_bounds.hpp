#pragma once

// Weakest finite reference values for bounds that start infinite.
//
// Propagation is evaluated on the weakest bounds found so far. For a bound
// that starts infinite, a finite candidate replaces the incumbent when the
// incumbent is still infinite or the candidate is weaker (smaller for lower
// bounds, larger for upper bounds). Whenever a variable is weakened, every
// row containing it is re-marked. Bounds that start finite are never touched.
//
// The loop can keep weakening forever through amplifying cycles, so it is
// capped; cap_hit reports that the result did not settle.

#include <cstddef>
#include <utility>
#include <vector>

#include "propmeter/activity.hpp"
#include "propmeter/bounds.hpp"
#include "propmeter/problem.hpp"

namespace propmeter
{

struct WeakestBounds
{
   std::vector<ExtReal> lower;
   std::vector<ExtReal> upper;
   int iterations_used = 0;
   bool cap_hit = false;

   std::size_t
   size() const
   {
      return lower.size();
   }

   const ExtReal&
   bound( std::size_t j, BoundSide side ) const
   {
      return side == BoundSide::kLower ? lower[j] : upper[j];
   }
};

struct WeakestBoundsOptions
{
   int max_iterations = 100;
   /// Scan only rows touched by a weakening. Disabling it scans all rows every
   /// iteration; the result is the same.
   bool use_marking = true;
   double integrality_eps = 1e-6;
};

template <typename OnIteration>
WeakestBounds
compute_weakest_bounds( const ProblemInstance& inst, const WeakestBoundsOptions& opts,
                        OnIteration&& on_iteration )
{
   const BoundsState start = BoundsState::start_of( inst );
   BoundsState weak = start;
   std::vector<char> marked( inst.num_rows(), 1 );

   WeakestBounds result;
   bool changed = true;
   while( changed )
   {
      if( result.iterations_used >= opts.max_iterations )
      {
         result.cap_hit = true;
         break;
      }
      ++result.iterations_used;
      changed = false;

      for( std::size_t i = 0; i < inst.num_rows(); ++i )
      {
         if( opts.use_marking && !marked[i] )
            continue;
         marked[i] = 0;
         const LinearConstraint& c = inst.constraint( i );
         for( const Term& t : c.terms )
         {
            const std::size_t j = t.var;
            const auto cand =
                bound_candidates( c, weak, j, inst.domain( j ).is_integer, opts.integrality_eps );
            bool weakened = false;
            if( start.lower[j].is_neg_inf() && cand.lower.is_finite() &&
                ( weak.lower[j].is_neg_inf() || cand.lower < weak.lower[j] ) )
            {
               weak.lower[j] = cand.lower;
               weakened = true;
            }
            if( start.upper[j].is_pos_inf() && cand.upper.is_finite() &&
                ( weak.upper[j].is_pos_inf() || cand.upper > weak.upper[j] ) )
            {
               weak.upper[j] = cand.upper;
               weakened = true;
            }
            if( weakened )
            {
               changed = true;
               for( std::size_t k : inst.column( j ) )
                  marked[k] = 1;
            }
         }
      }
      on_iteration( result.iterations_used, std::as_const( weak ) );
   }

   result.lower = std::move( weak.lower );
   result.upper = std::move( weak.upper );
   return result;
}

inline WeakestBounds
compute_weakest_bounds( const ProblemInstance& inst, const WeakestBoundsOptions& opts = {} )
{
   return compute_weakest_bounds( inst, opts, []( int, const BoundsState& ) {} );
}

} // namespace propmeter
