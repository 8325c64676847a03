#include <gtest/gtest.h>
#include <cstring>

#include <cmath>
#include <limits>
#include <random>

#include "propmeter/ext_real.hpp"
#include "propmeter/problem.hpp"
#include "propmeter/text_format.hpp"
#include "support/fixtures.hpp"
#include "support/random_instance.hpp"

using namespace propmeter;
using propmeter::support::fin;

TEST( ExtRealTest, CanonicalizesAtThreshold )
{
   EXPECT_TRUE( make_ext( 3.5 ).is_finite() );
   EXPECT_EQ( make_ext( 3.5 ).value(), 3.5 );
   EXPECT_TRUE( make_ext( 1e20 ).is_pos_inf() );
   EXPECT_TRUE( make_ext( -1e20 ).is_neg_inf() );
   EXPECT_TRUE( make_ext( 9.999999999999999e19 ).is_finite() );
   EXPECT_TRUE( make_ext( std::numeric_limits<double>::infinity() ).is_pos_inf() );
   EXPECT_TRUE( make_ext( -std::numeric_limits<double>::infinity() ).is_neg_inf() );
}

TEST( ExtRealTest, RejectsNaN )
{
   EXPECT_THROW( make_ext( std::nan( "" ) ), std::invalid_argument );
}

TEST( ExtRealTest, CanonicalizationIsIdempotent )
{
   std::mt19937_64 rng( 11 );
   std::uniform_real_distribution<double> exp10( -30.0, 30.0 );
   for( int k = 0; k < 2000; ++k )
   {
      const double x = ( k % 2 ? -1.0 : 1.0 ) * std::pow( 10.0, exp10( rng ) );
      const ExtReal a = make_ext( x );
      EXPECT_TRUE( make_ext( a.to_double() ).identical( a ) );
   }
}

TEST( ExtRealTest, OrderingIsTotalAndAgreesWithReals )
{
   const ExtReal ninf = ExtReal::neg_inf(), pinf = ExtReal::pos_inf();
   EXPECT_TRUE( ninf < fin( -1e19 ) );
   EXPECT_TRUE( fin( 1e19 ) < pinf );
   EXPECT_TRUE( ninf < pinf );
   EXPECT_TRUE( ninf == ExtReal::neg_inf() );
   EXPECT_FALSE( pinf < pinf );
   std::mt19937_64 rng( 5 );
   std::uniform_real_distribution<double> d( -100, 100 );
   for( int k = 0; k < 1000; ++k )
   {
      const double a = d( rng ), b = d( rng );
      EXPECT_EQ( fin( a ) < fin( b ), a < b );
      EXPECT_EQ( fin( a ) == fin( b ), a == b );
      EXPECT_TRUE( ninf < fin( a ) && fin( a ) < pinf );
   }
}

TEST( ExtRealTest, Addition )
{
   EXPECT_TRUE( ext_add( ExtReal::pos_inf(), fin( 5 ) ).is_pos_inf() );
   EXPECT_TRUE( ext_add( fin( 5 ), ExtReal::neg_inf() ).is_neg_inf() );
   EXPECT_EQ( ext_add( fin( 2 ), fin( 3 ) ).value(), 5.0 );
   EXPECT_THROW( ext_add( ExtReal::pos_inf(), ExtReal::neg_inf() ), ExtArithmeticError );
   EXPECT_THROW( ext_add( ExtReal::neg_inf(), ExtReal::pos_inf() ), ExtArithmeticError );
   // overflow past the threshold becomes infinite
   EXPECT_TRUE( ext_add( fin( 6e19 ), fin( 6e19 ) ).is_pos_inf() );
}

TEST( ExtRealTest, MultiplicationSignRule )
{
   EXPECT_TRUE( ext_mul( fin( -2 ), ExtReal::pos_inf() ).is_neg_inf() );
   EXPECT_TRUE( ext_mul( fin( -2 ), ExtReal::neg_inf() ).is_pos_inf() );
   EXPECT_TRUE( ext_mul( ExtReal::neg_inf(), ExtReal::neg_inf() ).is_pos_inf() );
   EXPECT_EQ( ext_mul( fin( -2 ), fin( 4 ) ).value(), -8.0 );
   EXPECT_THROW( ext_mul( fin( 0 ), ExtReal::pos_inf() ), ExtArithmeticError );
}

TEST( ExtRealTest, ValueOfInfinityThrows )
{
   EXPECT_THROW( (void)ExtReal::pos_inf().value(), std::logic_error );
   EXPECT_EQ( to_string( ExtReal::pos_inf() ), "+inf" );
   EXPECT_EQ( to_string( ExtReal::neg_inf() ), "-inf" );
   EXPECT_EQ( to_string( fin( 0.1 ) ), "0.1" );
}

TEST( BuildInstanceTest, Fix1ColumnIndex )
{
   const auto inst = support::fix1();
   ASSERT_EQ( inst.num_vars(), 2u );
   ASSERT_EQ( inst.num_rows(), 1u );
   EXPECT_EQ( std::vector<std::size_t>( inst.column( 0 ).begin(), inst.column( 0 ).end() ),
              std::vector<std::size_t>{ 0 } );
   EXPECT_EQ( std::vector<std::size_t>( inst.column( 1 ).begin(), inst.column( 1 ).end() ),
              std::vector<std::size_t>{ 0 } );
}

TEST( BuildInstanceTest, Fix3ColumnIndex )
{
   const auto inst = support::fix3();
   EXPECT_EQ( std::vector<std::size_t>( inst.column( 0 ).begin(), inst.column( 0 ).end() ),
              std::vector<std::size_t>{ 0 } );
   EXPECT_EQ( std::vector<std::size_t>( inst.column( 1 ).begin(), inst.column( 1 ).end() ),
              ( std::vector<std::size_t>{ 0, 1, 2 } ) );
}

TEST( BuildInstanceTest, ColumnIndexIsTransposeOnRandomInstances )
{
   std::mt19937_64 rng( 3 );
   for( int k = 0; k < 200; ++k )
   {
      const auto inst = support::random_instance( rng );
      std::size_t total = 0;
      for( std::size_t j = 0; j < inst.num_vars(); ++j )
      {
         std::size_t prev = 0;
         bool first = true;
         for( std::size_t i : inst.column( j ) )
         {
            EXPECT_TRUE( first || i > prev );
            first = false;
            prev = i;
            const auto& terms = inst.constraint( i ).terms;
            EXPECT_TRUE( std::any_of( terms.begin(), terms.end(),
                                      [j]( const Term& t ) { return t.var == j; } ) );
            ++total;
         }
      }
      EXPECT_EQ( total, inst.num_nonzeros() );
      for( const auto& c : inst.constraints() )
         for( std::size_t t = 1; t < c.terms.size(); ++t )
            EXPECT_LT( c.terms[t - 1].var, c.terms[t].var );
   }
}

TEST( BuildInstanceTest, SortsTerms )
{
   const auto inst = build_instance( { {}, {}, {} }, { { { { 2, 1.0 }, { 0, -1.0 } }, fin( 0 ), fin( 1 ) } } );
   EXPECT_EQ( inst.constraint( 0 ).terms[0].var, 0u );
   EXPECT_EQ( inst.constraint( 0 ).terms[1].var, 2u );
}

namespace
{

ValidationError
capture( const std::vector<VariableDomain>& d, const std::vector<LinearConstraint>& c )
{
   try
   {
      build_instance( d, c );
   }
   catch( const ValidationError& e )
   {
      return e;
   }
   ADD_FAILURE() << "expected a validation error";
   return ValidationError( "none", std::nullopt, std::nullopt );
}

} // namespace

TEST( BuildInstanceTest, RejectsZeroCoefficient )
{
   const auto e = capture( { {}, {} }, { { { { 0, 1.0 }, { 1, 0.0 } }, fin( 0 ), fin( 1 ) } } );
   EXPECT_EQ( e.row(), 0u );
   EXPECT_EQ( e.col(), 1u );
}

TEST( BuildInstanceTest, RejectsMalformedInput )
{
   const double nan = std::nan( "" );
   EXPECT_EQ( capture( { {} }, { { { { 0, nan } }, fin( 0 ), fin( 1 ) } } ).col(), 0u );
   EXPECT_EQ( capture( { {} }, { { {}, fin( 0 ), fin( 1 ) }, { { { 0, 1.0 } }, fin( 2 ), fin( 1 ) } } ).row(),
              1u );
   EXPECT_EQ( capture( { {} }, { { { { 0, 1.0 } }, ExtReal::neg_inf(), ExtReal::pos_inf() } } ).row(), 0u );
   EXPECT_EQ( capture( { {} }, { { { { 1, 1.0 } }, fin( 0 ), fin( 1 ) } } ).col(), 1u );
   EXPECT_EQ( capture( { {} }, { { { { 0, 1.0 }, { 0, 2.0 } }, fin( 0 ), fin( 1 ) } } ).col(), 0u );
   EXPECT_EQ( capture( { { fin( 2 ), fin( 1 ), false } }, {} ).col(), 0u );
   EXPECT_EQ( capture( { { fin( 0.2 ), fin( 0.8 ), true } }, {} ).col(), 0u );
   EXPECT_EQ( capture( { { ExtReal::pos_inf(), ExtReal::pos_inf(), false } }, {} ).col(), 0u );
   EXPECT_EQ( capture( { {} }, { { { { 0, 1e20 } }, fin( 0 ), fin( 1 ) } } ).col(), 0u );
}

TEST( BuildInstanceTest, RoundsIntegerBoundsInward )
{
   const auto inst = build_instance( { { fin( -0.5 ), fin( 3.7 ), true } }, {} );
   EXPECT_EQ( inst.domain( 0 ).lower.value(), 0.0 );
   EXPECT_EQ( inst.domain( 0 ).upper.value(), 3.0 );
}

TEST( TextFormatTest, RoundTripFixtures )
{
   for( const auto& inst : { support::fix1(), support::fix2(), support::fix3(), support::fix4(),
                             support::fix5() } )
   {
      const auto text = serialize_instance( inst );
      EXPECT_EQ( parse_instance_text( text ), inst ) << text;
      EXPECT_EQ( serialize_instance( parse_instance_text( text ) ), text );
   }
}

TEST( TextFormatTest, FixtureFilesMatchCodeFixtures )
{
   EXPECT_EQ( parse_instance_text( support::read_file( support::fixture_path( "fix1.txt" ) ) ), support::fix1() );
   EXPECT_EQ( parse_instance_text( support::read_file( support::fixture_path( "fix2.txt" ) ) ), support::fix2() );
   EXPECT_EQ( parse_instance_text( support::read_file( support::fixture_path( "fix3.txt" ) ) ), support::fix3() );
   EXPECT_EQ( parse_instance_text( support::read_file( support::fixture_path( "fix4.txt" ) ) ), support::fix4() );
   EXPECT_EQ( parse_instance_text( support::read_file( support::fixture_path( "fix5.txt" ) ) ), support::fix5() );
}

TEST( TextFormatTest, RoundTripIsBitExactOnRandomInstances )
{
   std::mt19937_64 rng( 17 );
   for( int k = 0; k < 300; ++k )
   {
      const auto inst = support::random_instance( rng );
      const auto back = parse_instance_text( serialize_instance( inst ) );
      ASSERT_EQ( back, inst );
      for( std::size_t i = 0; i < inst.num_rows(); ++i )
         for( std::size_t t = 0; t < inst.constraint( i ).terms.size(); ++t )
         {
            const double a = inst.constraint( i ).terms[t].coef;
            const double b = back.constraint( i ).terms[t].coef;
            EXPECT_EQ( std::memcmp( &a, &b, sizeof a ), 0 );
         }
   }
}

TEST( TextFormatTest, ReportsErrorLine )
{
   const std::string bad = "propmeter-instance 1\nvars 1\n0 0 x C\nrows 0\nend\n";
   try
   {
      parse_instance_text( bad );
      FAIL() << "expected TextFormatError";
   }
   catch( const TextFormatError& e )
   {
      EXPECT_EQ( e.line(), 3u );
   }
   EXPECT_THROW( parse_instance_text( "propmeter-instance 2\n" ), TextFormatError );
   EXPECT_THROW( parse_instance_text( "propmeter-instance 1\nvars 1\n0 0 1 C\nrows 0\n" ),
                 TextFormatError );
}
