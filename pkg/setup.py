from setuptools import setup, find_packages
setup(
    name="Saliency_Ensemble_Feature_Selection",
    version="0.1.0",
    python_requires=">=3.9.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "matplotlib",
        "numpy",
        "pandas",
        "scikit-learn",
        "scipy",
        "librosa",
        "click",
        "pyyaml",
        "joblib",
        "threadpoolctl",
    ],
    entry_points={
        "console_scripts": [
            "salient = salient.scripts.cli:entry_point",
        ]
    },)
