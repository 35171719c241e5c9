from mapdg.cli.app import main

raise SystemExit(main())
