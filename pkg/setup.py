from setuptools import setup, find_packages

"""
https://click.palletsprojects.com/en/8.1.x/setuptools/#setuptools-integration
"""

setup(
    name='fedshift',
    version='0.1',
    packages=find_packages(where='src'),
    package_dir={"": "src"},
    include_package_data=True,
    data_files=[('configs', ['configs/smoke.yml', 'configs/table1_desk.yml', 'configs/dirichlet_desk.yml'])],
    install_requires=[
        'click>=8,<9',
        'marshmallow>=3.13,<4',
        'pandas',
        'numpy',
        'attrs',
        'PyYAML'
    ],
    extras_require={
        'dev': [
            'nose2',
            'parameterized',
            'coverage'
        ]
    },
    entry_points='''
        [console_scripts]
        fedshift=fedshift.cli.__main__:main
    ''',
)
