//! Exponentially scaled modified Bessel functions `e^{-|x|} I_0(x)` and
//! `e^{-|x|} I_1(x)`, polynomial fits from Abramowitz & Stegun 9.8.1-9.8.4
//! (relative error below 2e-7).

pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.75 {
        let t = (x / 3.75).powi(2);
        let i0 = 1.0
            + t * (3.515_622_9
                + t * (3.089_942_4
                    + t * (1.206_749_2 + t * (0.265_973_2 + t * (0.036_076_8 + t * 0.004_581_3)))));
        i0 * (-ax).exp()
    } else {
        let t = 3.75 / ax;
        let p = 0.398_942_28
            + t * (0.013_285_92
                + t * (0.002_253_19
                    + t * (-0.001_575_65
                        + t * (0.009_162_81
                            + t * (-0.020_577_06
                                + t * (0.026_355_37 + t * (-0.016_476_33 + t * 0.003_923_77)))))));
        p / ax.sqrt()
    }
}

pub fn bessel_i1e(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 3.75 {
        let t = (x / 3.75).powi(2);
        let i1 = ax
            * (0.5
                + t * (0.878_905_94
                    + t * (0.514_988_69
                        + t * (0.150_849_34
                            + t * (0.026_587_33 + t * (0.003_015_32 + t * 0.000_324_11))))));
        i1 * (-ax).exp()
    } else {
        let t = 3.75 / ax;
        let p = 0.398_942_28
            + t * (-0.039_880_24
                + t * (-0.003_620_18
                    + t * (0.001_638_01
                        + t * (-0.010_315_55
                            + t * (0.022_829_67
                                + t * (-0.028_953_12 + t * (0.017_876_54 - t * 0.004_200_59)))))));
        p / ax.sqrt()
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}
