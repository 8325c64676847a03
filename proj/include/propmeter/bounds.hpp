#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "propmeter/problem.hpp"

namespace propmeter
{

enum class BoundSide
{
   kLower,
   kUpper
};

/// Current variable bounds during propagation.
struct BoundsState
{
   std::vector<ExtReal> lower;
   std::vector<ExtReal> upper;
   bool infeasible = false;
   /// First variable found with lower > upper.
   std::optional<std::size_t> infeasible_var;
   /// Row whose activities prove infeasibility (when detected by the row check).
   std::optional<std::size_t> infeasible_row;

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

   /// Starting bounds of an instance.
   static BoundsState
   start_of( const ProblemInstance& inst )
   {
      BoundsState s;
      s.lower.reserve( inst.num_vars() );
      s.upper.reserve( inst.num_vars() );
      for( const auto& d : inst.domains() )
      {
         s.lower.push_back( d.lower );
         s.upper.push_back( d.upper );
      }
      return s;
   }

   /// Number of bounds that are infinite.
   std::size_t
   count_infinite() const
   {
      std::size_t n = 0;
      for( std::size_t j = 0; j < size(); ++j )
         n += ( lower[j].is_infinite() ? 1 : 0 ) + ( upper[j].is_infinite() ? 1 : 0 );
      return n;
   }
};

} // namespace propmeter
