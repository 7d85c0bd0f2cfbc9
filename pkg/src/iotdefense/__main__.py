from iotdefense.cli import main

raise SystemExit(main())
