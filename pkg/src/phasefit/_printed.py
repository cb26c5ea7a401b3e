"""Published coefficient series and PLTE terms of the 10-step family.

Transcribed verbatim: each b_i series is a polynomial in v**2 with rational
coefficients, constant term first. Nothing here is computed.
"""

from fractions import Fraction

_TAYLOR_TEXT = {
    0: (
        "399187/241920 -52559/912384 100673687/29059430400 -1084493/27897053184 96453547/213412456857600",
        "-17327/8640 52559/114048 -100673687/3632428800 1084493/3487131648 -96453547/26676557107200",
        "597859/60480 -367913/228096 100673687/1037836800 -1084493/996323328 96453547/7621873459200",
        "-704183/60480 367913/114048 -100673687/518918400 1084493/498161664 -96453547/3810936729600",
        "465133/24192 -1839565/456192 100673687/415134720 -5422465/1992646656 96453547/3048749383680",
    ),
    1: (
        "399187/241920 -52559/456192 975124291/174356582400 -2896813/49816166400 1818828019/1067062284288000",
        "-17327/8640 52559/57024 -4461254807/43589145600 2517959/340540200 -98779707713/266765571072000",
        "597859/60480 -367913/114048 3127415341/6227020800 -3766196569/87178291200 44891085091/20520428544000",
        "-704183/60480 367913/57024 -7330976207/6227020800 584032469/5448643200 -1452594367391/266765571072000",
        "465133/24192 -1839565/228096 3844845691/2490808320 -4974280813/34871316480 773868209533/106706228428800",
    ),
    2: (
        "399187/241920 -52559/304128 371082169/58118860800 -83360891/523069747200 -1467578899/355687428096000",
        "-17327/8640 52559/38016 -3253170563/14529715200 5070942803/261534873600 -86978398867/88921857024000",
        "597859/60480 -367913/76032 2523373219/2075673600 -22329042629/130767436800 1453392734357/88921857024000",
        "-704183/60480 367913/38016 -6122891963/2075673600 133660742933/261534873600 -5024895032029/88921857024000",
        "465133/24192 -1839565/152064 3240803569/830269440 -37612768013/52306974720 2927078073011/35568742809600",
    ),
    3: (
        "399187/241920 -52559/228096 11315653/1937295360 -5807033/13076743680 -614853845/17072996548608",
        "-17327/8640 52559/28512 -5758537/14676480 225159101/6538371840 -8200289261/4268249137152",
        "597859/60480 -367913/57024 154801723/69189120 -2799488011/6538371840 1063054198007/21341245685760",
        "-704183/60480 367913/28512 -381346481/69189120 9217976399/6538371840 -5100295346143/21341245685760",
        "465133/24192 -1839565/114048 67543471/9225216 -241481599/118879488 16316044646989/42682491371520",
    ),
    4: (
        "399187/241920 -262795/912384 17265277/4358914560 -38566679/38041436160 -52935007231/426824913715200",
        "-17327/8640 262795/114048 -2649128441/4358914560 2650726483/52306974720 -374485131133/106706228428800",
        "597859/60480 -1839565/228096 1110676079/311351040 -6919361527/8047226880 1637603830619/15243746918400",
        "-704183/60480 1839565/114048 -5518849841/622702080 14263211663/4755179520 -73005517242211/106706228428800",
        "465133/24192 -9197825/456192 734695627/62270208 -183227481067/41845579776 9908801489731/8536498274304",
    ),
}

# TAYLOR_SERIES[level][i - 1][n] is the coefficient of v**(2n) in b_i.
TAYLOR_SERIES: dict[int, tuple[tuple[Fraction, ...], ...]] = {
    level: tuple(tuple(Fraction(tok) for tok in line.split()) for line in lines)
    for level, lines in _TAYLOR_TEXT.items()
}

# PLTE terms as printed: (coefficient, power of w, derivative order of y),
# every term multiplied by h**12.
PLTE_TERMS: dict[int, tuple[tuple[Fraction, int, int], ...]] = {
    -1: ((Fraction(52559, 912384), 0, 12),),
    0: (
        (Fraction(52559, 912384), 2, 10),
        (Fraction(52559, 912384), 0, 12),
    ),
    1: (
        (Fraction(52559, 456192), 2, 10),
        (Fraction(52559, 912384), 4, 8),
        (Fraction(52559, 912384), 0, 12),
    ),
    2: (
        (Fraction(52559, 912384), 6, 6),
        (Fraction(52559, 304128), 2, 10),
        (Fraction(52559, 912384), 0, 12),
        (Fraction(52559, 304128), 4, 8),
    ),
    3: (
        (Fraction(52559, 228096), 2, 10),
        (Fraction(52559, 912384), 8, 4),
        (Fraction(52559, 152064), 4, 8),
        (Fraction(52559, 228096), 6, 6),
        (Fraction(52559, 912384), 0, 12),
    ),
    4: (
        (Fraction(52559, 912384), 10, 2),
        (Fraction(262795, 456192), 6, 6),
        (Fraction(262795, 912384), 8, 4),
        (Fraction(262795, 456192), 4, 8),
        (Fraction(52559, 912384), 0, 12),
        (Fraction(262795, 912384), 2, 10),
    ),
}
