#!/usr/bin/env python3

"""Installer for marker-rally."""

import os
from setuptools import setup, find_packages


def content_of(*files, encoding='utf-8'):
    """Return the content of ``files`` (which should be paths)."""
    here = os.path.abspath(os.path.dirname(__file__))
    content = []
    for f in files:
        with open(os.path.join(here, f), encoding=encoding) as stream:
            content.append(stream.read())
    return '\n'.join(content)


requires = [
    'bag >= 3.0.0',
    'colander',
    'numpy >= 1.17',    # Generator and SeedSequence
    'zope.interface',
]

setup(
    name='marker-rally',
    version='0.1.0.dev1',
    description='Marker tracks, a robot car simulator and DQN/TD3 agents '
    'that learn to race through camera observations',
    long_description=content_of('README.rst'),
    classifiers=[  # https://pypi.org/pypi?:action=list_classifiers
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        'License :: OSI Approved :: BSD License',
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],
    keywords=[
        'reinforcement learning', 'dqn', 'td3', 'robot', 'racing',
        'simulation'],
    license='BSD',
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    zip_safe=False,
    python_requires='>=3.8',
    install_requires=requires,
    tests_require=requires + ['pytest', 'hypothesis'],
    extras_require={'test': ['pytest', 'hypothesis']},
    entry_points={
        'console_scripts': ['marker-rally = markerrally.cli:main'],
    },
)
