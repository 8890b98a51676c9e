from setuptools import setup, find_packages

if __name__ == "__main__":
    setup(
        name="lu-equiv",
        version="0.1.0",
        description="Local-unitary equivalence checks for multipartite qudit states via correlation tensors and trace identities",
        packages=find_packages(exclude=["golden"]),
        py_modules=["config", "errors", "hypermatrix", "qudit_state", "lu_action", "serialization", "main"],
        install_requires=[
            line.strip()
            for line in open("requirements.txt").readlines()
            if not line.startswith("#") and line.strip()
        ],
        entry_points={"console_scripts": ["lu-equiv=main:main"]},
        python_requires=">=3.8",
    )
