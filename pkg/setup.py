from setuptools import find_packages, setup

setup_requires = []

install_requires = [
    "numpy",
    "matplotlib",
    "scipy",
    "threadpoolctl",
    "tqdm",
]

setup(
    name="scikit-cvrepeater",
    version="0.1.0",
    description="numpy/scipy based rates of continuous-variable quantum repeaters",
    license="MIT",
    install_requires=install_requires,
    extras_require={"test": ["pytest"]},
    packages=find_packages(include=["skcvr*"]),
    package_data={"skcvr": ["py.typed"]},
    entry_points={"console_scripts": ["skcvr=skcvr.cli:main"]},
)
