from setuptools import setup

setup(
    name='sorpy',
    version='0.1.0',
    author='sorpy developers',
    description='Sequential offsetted regressions: marginal models for longitudinal data from biased sampling designs.',
    long_description=open('README.txt').read(),

    packages=["sorpy"],
    py_modules=['examples'],
    python_requires='>=3.8',
    install_requires=['numpy>=1.22', 'scipy>=1.8', 'pandas>=1.5', 'pydantic>=2.0'],
    extras_require={'test': ['pytest', 'statsmodels'], 'doc': ['sphinx']},
    entry_points={'console_scripts': ['sorpy=sorpy.cli:main']},

    keywords='longitudinal data analysis generalized estimating equations outcome dependent sampling biased sampling',
    license='GNU General Public License (GPL)',
    classifiers=[
                    'Intended Audience :: Developers',
                    'Intended Audience :: Science/Research',
                    'License :: OSI Approved',
                    'License :: OSI Approved :: GNU General Public License (GPL)',
                    'Operating System :: MacOS',
                    'Operating System :: Microsoft :: Windows',
                    'Operating System :: POSIX',
                    'Operating System :: Unix',
                    'Programming Language :: Python :: 3',
                    'Topic :: Scientific/Engineering :: Mathematics'
                  ]
    )
