#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "propmeter/propagator.hpp"
#include "propmeter/weakest_bounds.hpp"
#include "support/fixtures.hpp"
#include "support/random_instance.hpp"

using namespace propmeter;
using propmeter::support::fin;

namespace
{

// First finite value taken by each initially infinite bound along a run.
struct FirstFinite
{
   std::vector<std::optional<ExtReal>> lower, upper;
};

FirstFinite
first_finite_values( const ProblemInstance& inst, const PropagationConfig& cfg )
{
   FirstFinite ff;
   ff.lower.resize( inst.num_vars() );
   ff.upper.resize( inst.num_vars() );
   propagate_to_fixpoint( inst, cfg, [&]( const BoundsState&, const RoundStats& stats ) {
      for( const auto& c : stats.changes )
         if( c.is_infinite_reduction() )
            ( c.side == BoundSide::kLower ? ff.lower : ff.upper )[c.var] = c.new_value;
   } );
   return ff;
}

std::size_t
dominance_violations( const ProblemInstance& inst, const WeakestBounds& wb, const FirstFinite& ff )
{
   std::size_t bad = 0;
   for( std::size_t j = 0; j < inst.num_vars(); ++j )
   {
      if( ff.lower[j] && ( wb.lower[j].is_infinite() || *ff.lower[j] < wb.lower[j] ) )
         ++bad;
      if( ff.upper[j] && ( wb.upper[j].is_infinite() || *ff.upper[j] > wb.upper[j] ) )
         ++bad;
   }
   return bad;
}

} // namespace

TEST( WeakestBoundsTest, Fix3 )
{
   std::vector<BoundsState> history;
   const auto wb = compute_weakest_bounds( support::fix3(), {}, [&]( int, const BoundsState& s ) {
      history.push_back( s );
   } );
   EXPECT_EQ( wb.upper[0].value(), 9.0 );
   EXPECT_EQ( wb.upper[1].value(), 6.0 );
   EXPECT_EQ( wb.lower[0].value(), 0.0 );
   EXPECT_FALSE( wb.cap_hit );
   ASSERT_GE( history.size(), 2u );
   // iteration 1 sets u2 = 6 only (C1 precedes C2 and sees u2 infinite)
   EXPECT_TRUE( history[0].upper[0].is_pos_inf() );
   EXPECT_EQ( history[0].upper[1].value(), 6.0 );
   EXPECT_EQ( history[1].upper[0].value(), 9.0 );
}

TEST( WeakestBoundsTest, Fix2AndFix1 )
{
   const auto w2 = compute_weakest_bounds( support::fix2() );
   EXPECT_EQ( w2.upper[0].value(), 4.0 );
   EXPECT_EQ( w2.upper[1].value(), 5.0 );
   const auto f1 = support::fix1();
   const auto w1 = compute_weakest_bounds( f1 );
   EXPECT_EQ( w1.lower[0].value(), 0.0 );
   EXPECT_EQ( w1.lower[1].value(), 0.0 );
   EXPECT_EQ( w1.upper[0].value(), 3.0 );
   EXPECT_EQ( w1.upper[1].value(), 10.0 );
}

TEST( WeakestBoundsTest, FiniteStartBoundsAreKept )
{
   std::mt19937_64 rng( 61 );
   support::RandomInstanceParams p;
   p.infinite_bound_fraction = 0.0;
   for( int k = 0; k < 100; ++k )
   {
      const auto inst = support::random_instance( rng, p );
      const auto wb = compute_weakest_bounds( inst );
      for( std::size_t j = 0; j < inst.num_vars(); ++j )
      {
         EXPECT_TRUE( wb.lower[j].identical( inst.domain( j ).lower ) );
         EXPECT_TRUE( wb.upper[j].identical( inst.domain( j ).upper ) );
      }
   }
}

TEST( WeakestBoundsTest, MarkingIsSound )
{
   std::mt19937_64 rng( 67 );
   for( int k = 0; k < 300; ++k )
   {
      const auto inst = support::random_instance( rng );
      WeakestBoundsOptions marked, scanned;
      scanned.use_marking = false;
      const auto a = compute_weakest_bounds( inst, marked );
      const auto b = compute_weakest_bounds( inst, scanned );
      EXPECT_EQ( a.cap_hit, b.cap_hit );
      if( a.cap_hit )
         continue;
      for( std::size_t j = 0; j < inst.num_vars(); ++j )
      {
         EXPECT_TRUE( a.lower[j].identical( b.lower[j] ) ) << serialize_instance( inst );
         EXPECT_TRUE( a.upper[j].identical( b.upper[j] ) ) << serialize_instance( inst );
      }
   }
}

TEST( WeakestBoundsTest, MonotoneWeakeningAndStartInvariants )
{
   std::mt19937_64 rng( 71 );
   for( int k = 0; k < 300; ++k )
   {
      const auto inst = support::random_instance( rng );
      const auto s = BoundsState::start_of( inst );
      BoundsState prev = s;
      bool monotone = true;
      const auto wb = compute_weakest_bounds( inst, {}, [&]( int, const BoundsState& cur ) {
         for( std::size_t j = 0; j < cur.size(); ++j )
         {
            if( prev.lower[j].is_finite() )
               monotone = monotone && !( cur.lower[j] > prev.lower[j] );
            if( prev.upper[j].is_finite() )
               monotone = monotone && !( cur.upper[j] < prev.upper[j] );
         }
         prev = cur;
      } );
      EXPECT_TRUE( monotone );
      for( std::size_t j = 0; j < inst.num_vars(); ++j )
      {
         EXPECT_FALSE( wb.lower[j] < s.lower[j] );
         EXPECT_FALSE( wb.upper[j] > s.upper[j] );
         if( s.lower[j].is_finite() )
         {
            EXPECT_TRUE( wb.lower[j].identical( s.lower[j] ) );
         }
         if( s.upper[j].is_finite() )
         {
            EXPECT_TRUE( wb.upper[j].identical( s.upper[j] ) );
         }
      }
   }
}

TEST( WeakestBoundsTest, AmplifyingCycleHitsCap )
{
   // x <= y + 1, y <= x + 1, x <= 5 keeps weakening both upper bounds.
   const auto inst = build_instance(
       { { fin( 0 ), support::kPosInf, false }, { fin( 0 ), support::kPosInf, false } },
       { { { { 0, 1.0 }, { 1, -1.0 } }, support::kNegInf, fin( 1 ) },
         { { { 0, -1.0 }, { 1, 1.0 } }, support::kNegInf, fin( 1 ) },
         { { { 0, 1.0 } }, support::kNegInf, fin( 5 ) } } );
   WeakestBoundsOptions opts;
   opts.max_iterations = 20;
   const auto wb = compute_weakest_bounds( inst, opts );
   EXPECT_TRUE( wb.cap_hit );
   EXPECT_EQ( wb.iterations_used, 20 );
   EXPECT_GT( wb.upper[0].value(), 5.0 );
}

TEST( WeakestBoundsTest, ConvergedRunDoesNotReportCap )
{
   WeakestBoundsOptions opts;
   opts.max_iterations = 3;
   // FIX3 changes in iterations 1 and 2 and settles in iteration 3
   const auto wb = compute_weakest_bounds( support::fix3(), opts );
   EXPECT_FALSE( wb.cap_hit );
   EXPECT_EQ( wb.iterations_used, 3 );
   opts.max_iterations = 2;
   EXPECT_TRUE( compute_weakest_bounds( support::fix3(), opts ).cap_hit );
}

TEST( WeakestBoundsTest, Fix3AllOrdersNeverWeaker )
{
   const auto inst = support::fix3();
   const auto wb = compute_weakest_bounds( inst );
   std::vector<std::size_t> order{ 0, 1, 2 };
   do
   {
      for( auto v : { Variant::kImmediate, Variant::kDeferred } )
      {
         PropagationConfig cfg;
         cfg.variant = v;
         cfg.constraint_order = order;
         const auto ff = first_finite_values( inst, cfg );
         EXPECT_EQ( dominance_violations( inst, wb, ff ), 0u );
         // the weakest value 9 for u1 needs u2 = 6 first; only C2 before C3 in an
         // immediate run can produce it
      }
   } while( std::next_permutation( order.begin(), order.end() ) );
}

TEST( WeakestBoundsTest, DominanceOnRandomInstances )
{
   std::mt19937_64 rng( 73 );
   std::size_t violations = 0;
   for( int k = 0; k < 40; ++k )
   {
      const auto inst = support::random_infinite_instance( rng );
      const auto wb = compute_weakest_bounds( inst );
      if( wb.cap_hit )
         continue;
      for( int o = 0; o < 25; ++o )
         for( auto v : { Variant::kImmediate, Variant::kDeferred } )
         {
            PropagationConfig cfg;
            cfg.variant = v;
            cfg.constraint_order = support::random_permutation( rng, inst.num_rows() );
            violations += dominance_violations( inst, wb, first_finite_values( inst, cfg ) );
         }
   }
   EXPECT_EQ( violations, 0u );
}
