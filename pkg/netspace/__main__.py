from netspace.cli import main

main()
