// ln Gamma(x) to 40 digits, rounded to double.
pub const LOG_GAMMA_REF: [(f64, f64); 40] = [
    (0.001, 6.907178885383853),
    (0.0025, 5.990026642114524),
    (0.01, 4.599479878042022),
    (0.05, 2.9688792010517306),
    (0.1, 2.252712651734206),
    (0.25, 1.2880225246980774),
    (0.4999, 0.5725613186041184),
    (0.5, 0.5723649429247001),
    (0.75, 0.20328095143129538),
    (0.9, 0.06637623973474295),
    (0.999, 0.0005780385328913802),
    (1.0001, -5.771334222047127e-05),
    (1.2, -0.08537409000331583),
    (1.4999, -0.12078588195849393),
    (1.6, -0.11259176569675577),
    (1.9, -0.03898427592308336),
    (1.9999, -4.227520877215346e-05),
    (2.0001, 4.2281658112919945e-05),
    (2.2, 0.09694746679063887),
    (2.4999, 0.28461255726068263),
    (2.5001, 0.2847531885887332),
    (3.0, std::f64::consts::LN_2),
    (3.7, 1.428072326665388),
    (4.5, 2.4537365708424423),
    (6.25, 5.219603986990229),
    (8.0, 8.525161361065415),
    (9.99, 12.779315214350193),
    (10.0, 12.801827480081469),
    (10.01, 12.824350262448247),
    (12.5, 18.734347511936445),
    (17.0, 30.671860106080672),
    (25.5, 56.389167643719944),
    (33.3, 82.60372358165495),
    (50.0, 144.5657439463449),
    (75.25, 248.65103474266476),
    (99.5, 356.8353828236131),
    (120.0, 453.0248962384961),
    (150.0, 600.0094705553274),
    (169.9, 700.9240078752711),
    (170.0, 701.437263808737),
];
