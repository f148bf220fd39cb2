"""Reference values computed independently with mpmath at 60 significant digits.

The dictionaries below are the verbatim output of ``tests/generate_oracles.py``.

BESSEL_ZEROS   mpmath.besseljzero; for negative order, bisection on mpmath.besselj
HW_THETA       the raw oscillatory y-integral, split at zeros of sin(pi y / z)
CONFINED_MASS  2 |S^{N-1}| sum_k j_k^-2 exp(-j_k^2 T / 2) over 40 high-precision zeros
CONFINE_IMAGES method of images: N = 1 on (-1, 1); N = 3 via r P = killed motion on (0, 1)
"""

BESSEL_ZEROS = {
    (-0.9, 1): 0.64783088075037718595,
    (-0.9, 2): 4.0160865891820289818,
    (-0.9, 3): 7.1870313905077112766,
    (-0.9, 10): 29.207230090953441145,
    (-0.9, 20): 60.628120464491650919,
    (-0.9, 50): 154.87870998984224496,
    (-0.5, 1): 1.5707963267948966192,
    (-0.5, 2): 4.7123889803846898577,
    (-0.5, 3): 7.8539816339744830962,
    (-0.5, 10): 29.845130209103035765,
    (-0.5, 20): 61.26105674500096815,
    (-0.5, 50): 155.5088363526947653,
    (0, 1): 2.4048255576957727686,
    (0, 2): 5.5200781102863106496,
    (0, 3): 8.653727912911012217,
    (0, 10): 30.634606468431975118,
    (0, 20): 62.048469190227169883,
    (0, 50): 156.29503426853352382,
    (0.5, 1): 3.1415926535897932385,
    (0.5, 2): 6.2831853071795864769,
    (0.5, 3): 9.4247779607693797154,
    (0.5, 10): 31.415926535897932385,
    (0.5, 20): 62.831853071795864769,
    (0.5, 50): 157.07963267948966192,
    (1, 1): 3.8317059702075123156,
    (1, 2): 7.0155866698156187535,
    (1, 3): 10.173468135062722077,
    (1, 10): 32.189679910974403627,
    (1, 20): 63.611356698481232631,
    (1, 50): 157.86265540193029781,
    (1.5, 1): 4.4934094579090641753,
    (1.5, 2): 7.7252518369377071642,
    (1.5, 3): 10.904121659428899827,
    (1.5, 10): 32.956389039822476725,
    (1.5, 20): 64.387119590557413712,
    (1.5, 50): 158.64412567326344147,
    (2.3, 1): 5.5138126119660368829,
    (2.3, 2): 8.825436427304284978,
    (2.3, 3): 12.043091702141767013,
    (2.3, 10): 34.169615319695382689,
    (2.3, 20): 65.620884768210906807,
    (2.3, 50): 159.89130541017593456,
    (10, 1): 14.475500686554541238,
    (10, 2): 18.433463666966582642,
    (10, 3): 22.046985364697801872,
    (10, 10): 45.231574103535044854,
    (10, 20): 77.106734246861295048,
    (10, 50): 171.71166291472090386,
    (30, 1): 36.0983369567477248,
    (30, 2): 41.09277866315342772,
    (30, 3): 45.452666287556611984,
    (30, 10): 71.352012515707450978,
    (30, 20): 104.84989742653606582,
    (30, 50): 201.1777758835921238,
}
HW_THETA = {
    (1, 0.2): 1.3424255550756084797e-6,
    (1, 0.3): 0.0080496899619291658664,
    (1, 0.5): 0.47173994391330172744,
    (1, 1): 0.73907653130323191697,
    (1, 2): 0.20505025363004830462,
    (1, 5): 0.028662782211301606298,
    (0.5, 0.4): 0.00076815614750098455777,
    (2, 0.3): 2.2653724409189983456,
    (3, 1.5): 0.088513429259345872643,
    (0.2, 3): 0.10533447432953253718,
}
CONFINED_MASS = {
    (1, 0.05): 1.6431751767694457672,
    (1, 0.5): 0.87553291647572638125,
    (1, 2.0): 0.13748064307333259377,
    (2, 0.05): 2.1017600615752177323,
    (2, 0.5): 0.51205104735326479642,
    (2, 2.0): 0.0066901669401899452475,
    (3, 0.05): 2.2609529835861987837,
    (3, 0.5): 0.21598701714801828341,
    (3, 2.0): 0.00013171201210879261288,
    (4, 0.05): 2.1286365516376075581,
    (4, 0.5): 0.068473689228669504973,
    (4, 2.0): 1.1305155804542990441e-6,
    (5, 0.05): 1.7967674999315722564,
    (5, 0.5): 0.016748409222204577269,
    (5, 2.0): 4.4404244516916294202e-9,
}
CONFINE_IMAGES = {
    (1, 0, 0.01): 1.0,
    (3, 0, 0.01): 1.0,
    (1, 0, 0.1): 0.99686919548399489971,
    (3, 0, 0.1): 0.96599853358991862411,
    (1, 0, 0.5): 0.68544576689035198998,
    (3, 0, 0.5): 0.16950649902357536455,
    (1, 0, 2.0): 0.10797704444410901349,
    (3, 0, 2.0): 0.00010344637240761029796,
    (1, 0.3, 0.01): 0.99999999999744037491,
    (3, 0.3, 0.01): 0.99999999999146791637,
    (1, 0.3, 0.1): 0.97310390290975045591,
    (3, 0.3, 0.1): 0.91060902025066897134,
    (1, 0.3, 0.5): 0.61194652919778914875,
    (3, 0.3, 0.5): 0.14553991278911827888,
    (1, 0.3, 2.0): 0.096208251133010358095,
    (3, 0.3, 2.0): 0.000088797713466099773812,
    (1, 0.5, 0.01): 0.99999942669685624161,
    (3, 0.5, 0.01): 0.99999885339371248322,
    (1, 0.5, 0.1): 0.88615160055738859169,
    (3, 0.5, 0.1): 0.77231160685859057537,
    (1, 0.5, 0.5): 0.48701271920755116314,
    (3, 0.5, 0.5): 0.10797704444410901349,
    (1, 0.5, 2.0): 0.076351300475085187328,
    (3, 0.5, 2.0): 0.000065856006054394028244,
    (1, 0.9, 0.01): 0.68268949213708578468,
    (3, 0.9, 0.01): 0.64743276904120643612,
    (1, 0.9, 0.1): 0.24817036411088430134,
    (3, 0.9, 0.1): 0.16463374199713003592,
    (1, 0.9, 0.5): 0.10823284000209620139,
    (3, 0.9, 0.5): 0.018547831354350490547,
    (1, 0.9, 2.0): 0.016891331243017179436,
    (3, 0.9, 2.0): 0.000011305902806927697912,
}

