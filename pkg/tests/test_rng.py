"""Reference-vector and distribution checks for the seeded generator."""

import pytest

from driftwatch.rng import SplitMix64, Xoshiro256StarStar, derive_seed

# Frozen outputs of the published C reference implementations
# (splitmix64 and xoshiro256**, the latter seeded via splitmix64).
SPLITMIX_SEED0 = [
    16294208416658607535,
    7960286522194355700,
    487617019471545679,
    17909611376780542444,
    1961750202426094747,
]
SPLITMIX_SEED42 = [
    13679457532755275413,
    2949826092126892291,
    5139283748462763858,
    6349198060258255764,
    701532786141963250,
]
XOSHIRO_SEED7 = [
    12923355070828475994,
    5142052590334782674,
    15488392906492639638,
    18098058644649177664,
    18278145976438096664,
    16099837482234907721,
    1120678062349637716,
    1926500276298015196,
]
XOSHIRO_SEED123456789 = [
    15127205273500847298,
    16265768176396019016,
    1514321867679316104,
    9853693475100939714,
    16001046604883718113,
    8931005260488469461,
    6489297192028154687,
    12022421923150254172,
]


def test_splitmix64_reference_vectors():
    sm = SplitMix64(0)
    assert [sm.next_u64() for _ in range(5)] == SPLITMIX_SEED0
    sm = SplitMix64(42)
    assert [sm.next_u64() for _ in range(5)] == SPLITMIX_SEED42


def test_xoshiro_reference_vectors():
    gen = Xoshiro256StarStar(7)
    assert [gen.next_u64() for _ in range(8)] == XOSHIRO_SEED7
    gen = Xoshiro256StarStar(123456789)
    assert [gen.next_u64() for _ in range(8)] == XOSHIRO_SEED123456789


def test_same_seed_same_stream():
    a = Xoshiro256StarStar(99)
    b = Xoshiro256StarStar(99)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_random_in_unit_interval():
    gen = Xoshiro256StarStar(5)
    xs = [gen.random() for _ in range(10000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    mean = sum(xs) / len(xs)
    assert abs(mean - 0.5) < 0.02


def test_randrange_bounds_and_coverage():
    gen = Xoshiro256StarStar(11)
    seen = {gen.randrange(7) for _ in range(1000)}
    assert seen == set(range(7))


def test_randrange_rejects_nonpositive():
    gen = Xoshiro256StarStar(0)
    with pytest.raises(ValueError):
        gen.randrange(0)


def test_shuffle_is_permutation_and_deterministic():
    xs = list(range(50))
    a, b = xs[:], xs[:]
    Xoshiro256StarStar(3).shuffle(a)
    Xoshiro256StarStar(3).shuffle(b)
    assert a == b
    assert sorted(a) == xs
    assert a != xs  # astronomically unlikely to be identity


def test_derive_seed_stable_and_salt_sensitive():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert derive_seed(1, 2) != derive_seed(2, 2)
