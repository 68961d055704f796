"""Built-in experiment configurations.

Each preset is a complete config mapping as accepted by ``holomimo run``.
``fig6`` runs the capacity experiment at full scale; ``fig6-desk`` is the
same experiment shrunk enough to finish in seconds.
"""

PRESETS = {
    "fig2": {
        "kind": "eigenvalues",
        "tx": {"nx": 41, "ny": 41, "dx": 0.5},
        "spectrum": "isotropic",
        "rho": [],
        "seed": 20,
        "out_dir": "out/fig2",
    },
    "fig3": {
        "kind": "eigenvalues",
        "tx": {"nx": 41, "ny": 41, "dx": 0.5},
        "spectrum": "isotropic",
        "pattern": "omni",
        "rho": [0.01],
        "seed": 30,
        "out_dir": "out/fig3",
    },
    "fig5": {
        "kind": "dof-sweep",
        "tx": {"nx": 41, "ny": 41, "dx": 0.25},
        "spectrum": "isotropic",
        "pattern": "omni",
        "rho": [0.1, 0.01, 0.001],
        "threshold_db": -40.0,
        "seed": 50,
        "out_dir": "out/fig5",
    },
    "fig6": {
        "kind": "capacity",
        "tx": {"nx": 38, "ny": 38, "dx": 0.4},
        "spectrum": "isotropic",
        "pattern": "omni",
        "rho": [0.3, 0.1, 0.03],
        "snr_db": {"start": -10.0, "stop": 40.0, "step": 5.0},
        "mc": 100,
        "normalize": "receive",
        "seed": 60,
        "out_dir": "out/fig6",
    },
    "fig6-desk": {
        "kind": "capacity",
        "tx": {"nx": 16, "ny": 16, "dx": 0.4},
        "spectrum": "isotropic",
        "pattern": "omni",
        "rho": [0.3, 0.1, 0.03],
        "snr_db": {"start": -10.0, "stop": 40.0, "step": 5.0},
        "mc": 100,
        "normalize": "receive",
        "seed": 66,
        "out_dir": "out/fig6-desk",
    },
}

PRESET_NOTES = {
    "fig2": "uncoupled eigenvalue polarization, 20-wavelength half-wavelength square array",
    "fig3": "coupling-whitened eigenvalues at rho=0.01 for the same array",
    "fig5": "degrees-of-freedom growth versus regularization, quarter-wavelength spacing",
    "fig6": "ergodic capacity crossing, full scale (1444 antennas; takes minutes)",
    "fig6-desk": "ergodic capacity crossing, desk scale (256 antennas)",
}
