import setuptools
setuptools.setup(
    # Ships data/*.coupling with the package
    include_package_data=True,
    package_data={'approx_revsynth': ['data/*.coupling']},

    # Name of your Package
    name='approx-revsynth',

    # Project Version
    version='1.0',

    description='Evolutionary synthesis of approximate reversible circuits with cost and noise evaluation',

    # Projects you want to include in your Package
    packages=setuptools.find_packages(exclude=['tests', 'examples', 'examples.*']),

    # Dependencies/Other modules required for your package to work
    install_requires=['numpy', 'PyYAML', 'colorama', 'prettytable'],
    extras_require={'test': ['pytest']},

    entry_points={'console_scripts': ['revsynth=approx_revsynth.cli:main']},
)
