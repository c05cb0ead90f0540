use masspcf_core::datagen::{noisy_cos, noisy_sin, RngSpec, DEFAULT_SIGMA};
use masspcf_core::integrate::{l2_inner_product, lp_distance};
use masspcf_core::{Bounds, Pcf, PcfArray, PcfError, SliceSpec};

fn f1() -> Pcf<f64> {
    Pcf::from_rows(&[[0., 5.], [2., 3.], [5., 0.]]).unwrap()
}
fn f2() -> Pcf<f64> {
    Pcf::from_rows(&[[0., 2.], [4., 7.], [8., 1.], [9., 0.]]).unwrap()
}
fn f3() -> Pcf<f64> {
    Pcf::from_rows(&[[0., 4.], [2., 3.], [3., 1.], [5., 0.]]).unwrap()
}
fn f4() -> Pcf<f64> {
    Pcf::from_rows(&[[0., 2.], [6., 1.], [7., 0.]]).unwrap()
}

#[test]
fn construction_and_export() {
    let f = f3();
    assert_eq!(f.to_string(), "<PCF size=4, dtype=float64>");
    assert_eq!(f.as_matrix(), &[[0., 4.], [2., 3.], [3., 1.], [5., 0.]]);
    let g = Pcf::from_rows(&[[0.0f32, 4.0], [2.0, 3.0]]).unwrap();
    assert_eq!(g.to_string(), "<PCF size=2, dtype=float32>");
}

#[test]
fn zeros_and_views() {
    let z = PcfArray::<f64>::zeros(&[10, 5, 4]).unwrap();
    assert_eq!(z.shape().to_string(), "Shape(10, 5, 4)");
    let a = z
        .slice(&[3.into(), SliceSpec::ALL, SliceSpec::ALL])
        .unwrap();
    assert_eq!(a.shape(), [5, 4]);
    let b = z
        .slice(&[SliceSpec::stepped(2, 9, 3), SliceSpec::from(1), 2.into()])
        .unwrap();
    assert_eq!(b.shape(), [3, 4]);
}

#[test]
fn sin_cos_means_along_columns() {
    let m = 10;
    let mut a = PcfArray::<f64>::zeros(&[2, m]).unwrap();
    let sin = noisy_sin(&[m], 100, DEFAULT_SIGMA, RngSpec::new(1)).unwrap();
    let cos = noisy_cos(&[m], 15, DEFAULT_SIGMA, RngSpec::new(2)).unwrap();
    a.slice_mut(&[0.into(), SliceSpec::ALL])
        .unwrap()
        .assign_array(&sin)
        .unwrap();
    a.slice_mut(&[1.into(), SliceSpec::ALL])
        .unwrap()
        .assign_array(&cos)
        .unwrap();
    assert_eq!(a.get(&[1, 3]).unwrap().len(), 16);

    let avg = a.mean_along(1).unwrap();
    assert_eq!(avg.shape(), [2]);
    let s = avg.get(&[0]).unwrap();
    // the mean of ten noisy samples tracks sin closely away from the jumps
    let err = lp_distance(s, &Pcf::zero(), 1.0, Bounds::new(0.0, 1.0).unwrap()).unwrap();
    assert!(err > 0.5 && err < 0.75, "{err}");
}

#[test]
fn matrix_entries() {
    let x = [f1(), f2(), f3(), f4()];
    let l1 = [
        [0., 34., 6., 12.],
        [34., 0., 34., 24.],
        [6., 34., 0., 10.],
        [12., 24., 10., 0.],
    ];
    let gram = [
        [77., 53., 55., 38.],
        [53., 213., 31., 51.],
        [55., 31., 43., 26.],
        [38., 51., 26., 25.],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(
                lp_distance(&x[i], &x[j], 1.0, Bounds::unbounded()).unwrap(),
                l1[i][j]
            );
            assert_eq!(
                l2_inner_product(&x[i], &x[j], Bounds::unbounded()).unwrap(),
                gram[i][j]
            );
        }
    }
    assert!(
        (lp_distance(&x[0], &x[2], 3.5, Bounds::unbounded()).unwrap() - 2.49774585).abs() < 1e-7
    );
}

#[test]
fn invalid_construction() {
    assert_eq!(Pcf::<f64>::new(vec![]), Err(PcfError::Empty));
    assert_eq!(
        Pcf::from_rows(&[[1.0f64, 2.0]]),
        Err(PcfError::NonZeroStart)
    );
    assert_eq!(
        Pcf::from_rows(&[[0.0f64, 1.0], [2.0, 3.0], [1.0, 0.0]]),
        Err(PcfError::NonIncreasingTimes { row: 2 })
    );
}
